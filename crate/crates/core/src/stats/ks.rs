use std::f64::consts::PI;

use super::TestReport;
use crate::error::{Error, Result};

/// Sup distance between the two empirical distribution functions.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::invalid("sample", "both samples must be nonempty"));
    }
    if a.iter().chain(b).any(|v| v.is_nan()) {
        return Err(Error::invalid("sample", "NaN in sample"));
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] == v {
            i += 1;
        }
        while j < b.len() && b[j] == v {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// Kolmogorov survival function `P(K > lambda)`.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        let y = (-PI * PI / (8.0 * lambda * lambda)).exp();
        let mut s = 0.0;
        let mut k = 1;
        loop {
            let term = y.powi(k * k);
            s += term;
            if term < 1e-17 || k > 100 {
                break;
            }
            k += 2;
        }
        (1.0 - (2.0 * PI).sqrt() / lambda * s).clamp(0.0, 1.0)
    } else {
        let x = (-2.0 * lambda * lambda).exp();
        let mut s = 0.0;
        let mut sign = 1.0;
        for j in 1..=100 {
            let term = x.powi(j * j);
            s += sign * term;
            if term < 1e-17 {
                break;
            }
            sign = -sign;
        }
        (2.0 * s).clamp(0.0, 1.0)
    }
}

/// Two-sample Kolmogorov–Smirnov test with the asymptotic p-value
/// (effective size with the usual small-sample correction).
pub fn ks_two_sample(a: &[f64], b: &[f64], level: f64) -> Result<TestReport> {
    let d = ks_statistic(a, b)?;
    let ne = (a.len() * b.len()) as f64 / (a.len() + b.len()) as f64;
    let sq = ne.sqrt();
    let p = if d == 0.0 {
        1.0
    } else {
        kolmogorov_q((sq + 0.12 + 0.11 / sq) * d)
    };
    Ok(TestReport::new("ks_two_sample", d, p, vec![a.len(), b.len()], level))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_cases() {
        let r = ks_two_sample(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0], 0.01).unwrap();
        assert_eq!((r.statistic, r.p_value), (0.0, 1.0));
        assert_eq!(ks_statistic(&[0.0], &[1.0]).unwrap(), 1.0);
        assert!(ks_statistic(&[], &[1.0]).is_err());
    }

    #[test]
    fn ties_are_merged() {
        // ECDFs after value 1: a = 2/3, b = 1/3; after 2: 1, 2/3.
        assert!((ks_statistic(&[1.0, 1.0, 2.0], &[1.0, 2.0, 3.0]).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn q_branches_meet() {
        let lo = kolmogorov_q(1.18 - 1e-9);
        let hi = kolmogorov_q(1.18 + 1e-9);
        assert!((lo - hi).abs() < 1e-8);
        // Tabulated critical value: P(K > 1.6276) = 0.01.
        assert!((kolmogorov_q(1.6276) - 0.01).abs() < 1e-4);
        assert!((kolmogorov_q(1.3581) - 0.05).abs() < 1e-4);
    }
}
