use edgebreak::graph::{build_event_log, SimConfig};
use edgebreak::stats::{kolmogorov_q, run_experiment, Execution};

#[test]
fn death_gaps_are_unit_exponential() {
    // Only the first ten gaps of each site: gaps that merely fit before the
    // horizon are biased short, but ten unit gaps exceed 40 with
    // probability below 1e-10.
    let mut gaps = Vec::new();
    for seed in 0..2u64 {
        let log = build_event_log(SimConfig::new(1.0, 1, 40.0, seed).with_window(-300, 300)).unwrap();
        for x in log.x_min()..=log.x_max() {
            let mut prev = 0.0;
            for t in log.deaths(x).take(10) {
                gaps.push(t - prev);
                prev = t;
            }
        }
    }
    assert!(gaps.len() >= 10_000, "{} gaps", gaps.len());
    gaps.sort_by(f64::total_cmp);
    let n = gaps.len() as f64;
    // One-sample KS against 1 - exp(-x), both sides of each ECDF step.
    let d = gaps
        .iter()
        .enumerate()
        .map(|(i, &g)| {
            let f = 1.0 - (-g).exp();
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max);
    let sn = n.sqrt();
    let p = kolmogorov_q((sn + 0.12 + 0.11 / sn) * d);
    assert!(p >= 0.01, "D = {d}, p = {p}");
}

#[test]
fn arrow_count_has_the_superposition_mean() {
    let config = SimConfig::new(2.0, 1, 100.0, 17).with_window(-50, 50);
    let directed_edges = 2.0 * (config.width() - 1) as f64;
    assert_eq!(directed_edges, 200.0);
    let counts = run_experiment(
        &|_, seed| Ok(build_event_log(config.with_seed(seed))?.arrow_count() as f64),
        1000,
        config.seed,
        Execution::Parallel,
    )
    .unwrap();
    let n = counts.len() as f64;
    let mean = counts.iter().sum::<f64>() / n;
    let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let want = 2.0 * 100.0 * directed_edges;
    assert!((mean - want).abs() < 3.0 * (var / n).sqrt(), "mean {mean} vs {want}");
}
