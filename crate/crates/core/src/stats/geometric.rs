use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::TestReport;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometricFit {
    pub p_hat: f64,
    pub mean: f64,
    /// `(first value, last value or None for the open tail, observed, expected)`.
    pub bins: Vec<(u64, Option<u64>, u64, f64)>,
    pub test: TestReport,
}

/// Fits Geometric(p) on `{1, 2, ...}` with `p = 1 / mean` and runs a
/// chi-square goodness-of-fit test. Bins are single values while both the
/// bin and the remaining tail keep expected count at least 5; the tail is
/// pooled into one open bin. One degree of freedom is spent on `p`.
pub fn geometric_fit(ns: &[u64], level: f64) -> Result<GeometricFit> {
    if ns.is_empty() {
        return Err(Error::InsufficientData("empty sample".into()));
    }
    if ns.contains(&0) {
        return Err(Error::invalid("sample", "geometric values must be at least 1"));
    }
    let n = ns.len() as f64;
    let mean = ns.iter().map(|&v| v as f64).sum::<f64>() / n;
    let p = 1.0 / mean;
    let q = 1.0 - p;
    let max = *ns.iter().max().expect("nonempty");
    let mut counts = vec![0u64; max as usize + 1];
    for &v in ns {
        counts[v as usize] += 1;
    }
    let mut bins = Vec::new();
    let mut k = 1u64;
    loop {
        let point = n * p * q.powi(k as i32 - 1);
        let tail_after = n * q.powi(k as i32);
        if point >= 5.0 && tail_after >= 5.0 {
            let obs = counts.get(k as usize).copied().unwrap_or(0);
            bins.push((k, Some(k), obs, point));
            k += 1;
        } else {
            let obs = counts.iter().skip(k as usize).sum();
            bins.push((k, None, obs, n * q.powi(k as i32 - 1)));
            break;
        }
    }
    let stat: f64 = bins
        .iter()
        .filter(|b| b.3 > 0.0)
        .map(|&(_, _, o, e)| (o as f64 - e).powi(2) / e)
        .sum();
    let df = bins.len() as i64 - 2;
    let p_value = if df <= 0 {
        1.0
    } else {
        ChiSquared::new(df as f64)
            .map_err(|e| Error::Degenerate(e.to_string()))?
            .sf(stat)
    };
    Ok(GeometricFit {
        p_hat: p,
        mean,
        bins,
        test: TestReport::new("chi_square_geometric", stat, p_value, vec![ns.len()], level),
    })
}
