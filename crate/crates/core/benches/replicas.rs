use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use edgebreak::contact::{survival_estimate, Configuration};
use edgebreak::graph::{EdgeMask, SimConfig};
use edgebreak::percolation::{extinction_counts, FieldMode, PercConfig};
use edgebreak::stats::Execution;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn survival(c: &mut Criterion) {
    let mut group = c.benchmark_group("survival");
    group.sample_size(10);
    let config = SimConfig::new(3.0, 1, 20.0, 11);
    let start = Configuration::single(0);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new(name, 64), &exec, |b, &exec| {
            b.iter(|| survival_estimate(&config, EdgeMask::FullGraph, &start, 64, exec).unwrap())
        });
    }
    group.finish();
}

fn percolation(c: &mut Criterion) {
    let mut group = c.benchmark_group("extinction_tail");
    group.sample_size(10);
    let config = PercConfig::new(0.1, FieldMode::OneDependent, 40, 11);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new(name, 512), &exec, |b, &exec| {
            b.iter(|| extinction_counts(&config, &[2, 4, 8], 512, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, survival, percolation);
criterion_main!(benches);
