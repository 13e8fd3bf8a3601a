use edgebreak::percolation::{
    coupling_identity_check, evolve_percolation, gen_field, origin_run, FieldMode, PercConfig, PercField, PercStart,
};

/// Whether some nearest-neighbour path from `(x, 0)` ends at `(y, n)` through
/// open sites only, by enumerating all `2^n` step sequences.
fn path_exists(field: &PercField, x: i64, y: i64, n: u32) -> bool {
    (0u32..1 << n).any(|steps| {
        let mut pos = x;
        for k in 1..=n {
            pos += if steps >> (k - 1) & 1 == 1 { 1 } else { -1 };
            if !field.w(pos, k) {
                return false;
            }
        }
        pos == y
    })
}

fn brute_level(field: &PercField, starts: &[i64], n: u32) -> Vec<i64> {
    let hw = field.half_width();
    (-hw..=hw)
        .filter(|&y| (y + n as i64) % 2 == 0)
        .filter(|&y| starts.iter().any(|&x| (x - y).abs() <= n as i64 && path_exists(field, x, y, n)))
        .collect()
}

fn lattice_starts(hw: i64) -> Vec<i64> {
    // Starts one step outside the window can still feed it.
    (-hw - 1..=hw + 1).filter(|x| x % 2 == 0).collect()
}

#[test]
fn every_small_field_matches_path_enumeration() {
    let config = PercConfig::new(0.5, FieldMode::Independent, 3, 0);
    let hw = config.half_width();
    assert_eq!(hw, 5);
    let sites: Vec<(i64, u32)> = (1..=3u32)
        .flat_map(|n| (-hw..=hw).filter(move |y| (y + n as i64) % 2 == 0).map(move |y| (y, n)))
        .collect();
    assert_eq!(sites.len(), 17);
    let starts = lattice_starts(hw);
    let (mut fields, mut identity_checks) = (0u64, 0u64);
    for mask in 0u32..1 << sites.len() {
        let field = PercField::from_fn(config, |y, n| {
            sites.iter().position(|&s| s == (y, n)).is_some_and(|i| mask >> i & 1 == 1)
        })
        .unwrap();
        let origin = origin_run(&field).unwrap();
        let full = evolve_percolation(&field, &PercStart::EvenLattice, 3).unwrap();
        for n in 0..=3u32 {
            let want0 = if n == 0 { vec![0] } else { brute_level(&field, &[0], n) };
            assert_eq!(origin.level(n), &want0[..], "mask {mask:#x} row {n}");
            if n > 0 {
                assert_eq!(full.level(n), &brute_level(&field, &starts, n)[..], "mask {mask:#x} row {n}");
            }
        }
        if origin.survives() {
            for n in 1..=3 {
                assert_eq!(coupling_identity_check(&field, n).unwrap(), Some(true), "mask {mask:#x} row {n}");
                identity_checks += 1;
            }
        }
        fields += 1;
    }
    assert_eq!(fields, 1 << 17);
    assert!(identity_checks > 0);
}

#[test]
fn random_fields_match_path_enumeration_to_row_twelve() {
    for seed in 0..60u64 {
        let mode = if seed % 2 == 0 { FieldMode::Independent } else { FieldMode::OneDependent };
        let field = gen_field(PercConfig::new(0.35, mode, 12, seed)).unwrap();
        let origin = origin_run(&field).unwrap();
        for n in 1..=12 {
            let lo = -(n as i64);
            let want: Vec<i64> = (lo..=-lo)
                .filter(|&y| (y + n as i64) % 2 == 0 && path_exists(&field, 0, y, n))
                .collect();
            assert_eq!(origin.level(n), &want[..], "seed {seed} row {n}");
        }
    }
}

#[test]
fn coupling_identity_on_random_fields() {
    let mut surviving = 0;
    for seed in 0..300u64 {
        let field = gen_field(PercConfig::new(0.1, FieldMode::OneDependent, 50, seed)).unwrap();
        if let Some(ok) = coupling_identity_check(&field, 50).unwrap() {
            assert!(ok, "seed {seed}");
            surviving += 1;
        }
    }
    assert!(surviving > 100);
}

#[test]
fn additivity_and_monotonicity_on_shared_fields() {
    for seed in 0..40u64 {
        let config = PercConfig::new(0.3, FieldMode::Independent, 30, seed).with_extent(6);
        let field = gen_field(config).unwrap();
        let run = |s: &[i64]| evolve_percolation(&field, &PercStart::Sites(s.to_vec()), 30).unwrap();
        let (a, b, ab) = (run(&[-4, 0]), run(&[6]), run(&[-4, 0, 6]));
        let opened = PercField::from_fn(config, |y, n| field.w(y, n) || (y + n as i64) % 4 == 0).unwrap();
        let bigger = evolve_percolation(&opened, &PercStart::Sites(vec![-4, 0]), 30).unwrap();
        for n in 0..=30 {
            let mut joined: Vec<i64> = a.level(n).iter().chain(b.level(n)).copied().collect();
            joined.sort_unstable();
            joined.dedup();
            assert_eq!(ab.level(n), &joined[..]);
            assert!(a.level(n).iter().all(|y| bigger.level(n).contains(y)));
            assert!(a.level(n).iter().all(|&y| (-4 - n as i64..=n as i64).contains(&y)));
        }
    }
}

fn stats_over(config: PercConfig, seeds: std::ops::Range<u64>, mut f: impl FnMut(&PercField)) {
    for seed in seeds {
        f(&gen_field(config.with_seed(seed)).unwrap());
    }
}

#[test]
fn independent_open_fraction() {
    let (mut open, mut total) = (0u64, 0u64);
    stats_over(PercConfig::new(0.2, FieldMode::Independent, 20, 0), 0..30, |f| {
        for n in 1..=20 {
            for y in (-20i64..=20).filter(|y| (y + n as i64) % 2 == 0) {
                open += u64::from(f.w(y, n));
                total += 1;
            }
        }
    });
    assert!(total >= 10_000);
    let p = open as f64 / total as f64;
    let se = (0.8f64 * 0.2 / total as f64).sqrt();
    assert!((p - 0.8).abs() < 3.0 * se, "p = {p}");
}

#[test]
fn one_dependent_marginals_and_range() {
    let eps = 0.2;
    let (mut closed, mut n_sites) = (0u64, 0u64);
    let mut pairs: Vec<(f64, f64)> = Vec::new();
    // Sites 0, 4, 8, ... on even rows: distance 4 apart, disjoint latent support.
    let mut all_closed = [0u64; 3];
    let mut groups = 0u64;
    stats_over(PercConfig::new(eps, FieldMode::OneDependent, 20, 0), 0..200, |f| {
        for n in (2..=20).step_by(2) {
            for y in (-16i64..=16).step_by(4) {
                let a = f.w(y, n);
                closed += u64::from(!a);
                n_sites += 1;
                if y + 4 <= 16 {
                    pairs.push((f64::from(u8::from(a)), f64::from(u8::from(f.w(y + 4, n)))));
                }
            }
            for base in [-16i64, 0] {
                groups += 1;
                for i in 1..=3 {
                    if (0..i).all(|k| !f.w(base + 4 * k as i64, n)) {
                        all_closed[i - 1] += 1;
                    }
                }
            }
        }
    });
    let p = closed as f64 / n_sites as f64;
    assert!((p - eps).abs() < 3.0 * (eps * (1.0 - eps) / n_sites as f64).sqrt(), "closed fraction {p}");

    let m = pairs.len() as f64;
    let (ma, mb) = (pairs.iter().map(|p| p.0).sum::<f64>() / m, pairs.iter().map(|p| p.1).sum::<f64>() / m);
    let cov = pairs.iter().map(|p| (p.0 - ma) * (p.1 - mb)).sum::<f64>() / m;
    let (va, vb) = (ma * (1.0 - ma), mb * (1.0 - mb));
    let corr = cov / (va * vb).sqrt();
    assert!(corr.abs() < 3.0 / m.sqrt(), "corr {corr}");

    for (i, &c) in all_closed.iter().enumerate() {
        let bound = eps.powi(i as i32 + 1);
        let se = (bound * (1.0 - bound) / groups as f64).sqrt();
        let phat = c as f64 / groups as f64;
        assert!(phat <= bound + 3.0 * se, "I = {}: {phat} > {bound}", i + 1);
    }
}

#[test]
fn neighbours_share_latent_support() {
    // w(y, n) and w(y + 2, n) share eta(y + 1, n), so both are open with
    // probability (1 - ε)^{3/2} rather than (1 - ε)^2.
    let eps = 0.3f64;
    let (mut both, mut total) = (0u64, 0u64);
    stats_over(PercConfig::new(eps, FieldMode::OneDependent, 10, 0), 0..300, |f| {
        for n in (2..=10).step_by(2) {
            for y in (-10i64..=6).step_by(4) {
                both += u64::from(f.w(y, n) && f.w(y + 2, n));
                total += 1;
                assert_eq!(f.w(y, n), f.eta(y - 1, n).unwrap() && f.eta(y + 1, n).unwrap());
            }
        }
    });
    let want = (1.0 - eps).powf(1.5);
    let se = (want * (1.0 - want) / total as f64).sqrt();
    assert!(((both as f64 / total as f64) - want).abs() < 3.5 * se);
}
