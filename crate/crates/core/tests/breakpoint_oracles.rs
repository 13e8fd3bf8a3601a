use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use edgebreak::breakpoints::{
    cse_violation_naive, increments, is_cse, psi_sequence, psi_sequence_with, restart_construction, BandEvaluator,
    Evaluator, PsiOptions,
};
use edgebreak::contact::{evolve, Configuration};
use edgebreak::graph::{build_event_log, EdgeMask, EventKind, SimConfig};

fn log_for(seed: u64, m: u32, horizon: f64, half: i64) -> edgebreak::graph::EventLog {
    build_event_log(SimConfig::new(3.0, m, horizon, seed).with_window(-half, half)).unwrap()
}

#[test]
fn band_evaluator_matches_naive_on_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(91);
    let mut checked = 0;
    for seed in 0..120u64 {
        let m = 1 + (seed % 3) as u32;
        let log = log_for(seed, m, 6.0, 60);
        let x = rng.random_range(-6..=6);
        let s = rng.random_range(0.0..5.0);
        let want = cse_violation_naive(&log, x, s, 6.0).unwrap();
        for width in [2, 24] {
            let got = BandEvaluator { initial_width: width }.violation(&log, x, s, 6.0).unwrap();
            assert_eq!(got, want, "seed {seed} M {m} x {x} s {s} width {width}");
        }
        checked += 1;
    }
    assert!(checked >= 100);
}

#[test]
fn psi_band_matches_psi_naive() {
    let naive = PsiOptions {
        margin: Some(0.0),
        evaluator: Evaluator::Naive,
    };
    let band = PsiOptions {
        margin: Some(0.0),
        ..PsiOptions::default()
    };
    let mut compared = 0;
    for seed in 0..110u64 {
        let log = log_for(seed, 1, 6.0, 45);
        let a = psi_sequence_with(&log, 6.0, &naive).unwrap();
        let b = psi_sequence_with(&log, 6.0, &band).unwrap();
        assert_eq!(a.points, b.points, "seed {seed}");
        compared += 1;
    }
    assert!(compared >= 100);
}

#[test]
fn psi_points_reverify_and_are_spaced() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut pool = Vec::new();
    for seed in 200..240u64 {
        let log = log_for(seed, 1, 30.0, 140);
        let series = psi_sequence(&log, 30.0).unwrap();
        let base = evolve(log.view(EdgeMask::FullGraph), &Configuration::single(0), 30.0).unwrap();
        let mut prev = 0.0;
        for p in &series.points {
            assert!(p.time >= prev + 1.0 - 1e-12);
            assert_eq!(base.state_at(p.time).unwrap().max(), Some(p.position));
            prev = p.time;
            pool.push((seed, p.position, p.time));
        }
        if let Ok(inc) = increments(&series) {
            let arrows: Vec<f64> = log
                .events()
                .iter()
                .filter(|e| matches!(e.kind, EventKind::Arrow { .. }))
                .map(|e| e.time)
                .collect();
            let pts: Vec<_> = series.uncensored().collect();
            for (w, (dr, dpsi)) in pts.windows(2).zip(&inc.pairs) {
                assert!(*dpsi >= 1.0 - 1e-12);
                let k = arrows.partition_point(|&u| u <= w[1].time) - arrows.partition_point(|&u| u <= w[0].time);
                assert!(dr.unsigned_abs() <= k as u64 * log.range() as u64);
            }
        }
    }
    assert!(pool.len() >= 100, "only {} points", pool.len());
    for _ in 0..100 {
        let (seed, x, s) = pool[rng.random_range(0..pool.len())];
        let log = log_for(seed, 1, 30.0, 140);
        assert!(is_cse(&log, x, s, 30.0).unwrap(), "seed {seed} ({x}, {s})");
    }
}

#[test]
fn first_break_point_is_the_restart_endpoint() {
    let mut matched = 0;
    for seed in 300..360u64 {
        let log = log_for(seed, 1, 25.0, 120);
        let series = psi_sequence(&log, 25.0).unwrap();
        let rec = restart_construction(&log, 25.0).unwrap();
        if series.points.is_empty() || rec.censored || series.window_suspect || rec.window_suspect {
            continue;
        }
        let first = series.points[0];
        assert_eq!(first.time, *rec.sigma.last().unwrap(), "seed {seed}");
        assert_eq!(first.position, rec.final_position, "seed {seed}");
        matched += 1;
    }
    assert!(matched >= 30, "only {matched} realizations");
}

#[test]
fn nearest_neighbour_cse_is_survival() {
    // With M = 1 the single start's right edge equals the half-line start's
    // for as long as the single start lives.
    let eval = BandEvaluator::default();
    for seed in 400..500u64 {
        let log = log_for(seed, 1, 15.0, 80);
        let base = evolve(log.view(EdgeMask::FullGraph), &Configuration::single(0), 15.0).unwrap();
        let out = eval.evaluate(&log, 0, 0.0, 15.0).unwrap();
        assert!(!out.edge_touched);
        assert_eq!(out.violation, base.extinct_at, "seed {seed}");
    }
}
