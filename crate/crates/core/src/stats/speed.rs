use serde::{Deserialize, Serialize};

use super::proportion::z_quantile;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeSpeed {
    pub alpha_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub level: f64,
    pub pairs: usize,
}

/// Ratio estimator `Σ Δr / Σ Δψ` with a delta-method normal interval.
pub fn edge_speed(pairs: &[(i64, f64)], level: f64) -> Result<EdgeSpeed> {
    let n = pairs.len();
    if n < 30 {
        return Err(Error::InsufficientData(format!("{n} increment pairs, need 30")));
    }
    let nf = n as f64;
    let sum_r: f64 = pairs.iter().map(|p| p.0 as f64).sum();
    let sum_t: f64 = pairs.iter().map(|p| p.1).sum();
    let alpha = sum_r / sum_t;
    let mean_t = sum_t / nf;
    let s2 = pairs
        .iter()
        .map(|&(r, t)| (r as f64 - alpha * t).powi(2))
        .sum::<f64>()
        / (nf - 1.0);
    let half = z_quantile(level) * (s2 / nf).sqrt() / mean_t;
    Ok(EdgeSpeed {
        alpha_hat: alpha,
        ci_low: alpha - half,
        ci_high: alpha + half,
        level,
        pairs: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_cases() {
        let s = edge_speed(&[(2, 1.0); 40], 0.95).unwrap();
        assert_eq!((s.alpha_hat, s.ci_low, s.ci_high), (2.0, 2.0, 2.0));
        let pairs: Vec<(i64, f64)> = (0..40).map(|i| (1 + 2 * (i % 2), 1.0)).collect();
        assert_eq!(edge_speed(&pairs, 0.95).unwrap().alpha_hat, 2.0);
        assert!(edge_speed(&pairs[..10], 0.95).is_err());
    }
}
