use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub trials: u64,
    pub successes: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub level: f64,
    pub excluded_boundary: u64,
    pub horizon_note: String,
}

impl EstimateReport {
    pub fn with_excluded(mut self, excluded: u64) -> Self {
        self.excluded_boundary = excluded;
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.horizon_note = note.into();
        self
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.ci_high - self.ci_low)
    }
}

pub(crate) fn z_quantile(level: f64) -> f64 {
    let normal = Normal::standard();
    normal.inverse_cdf(0.5 + 0.5 * level)
}

/// Wilson score interval at confidence `level` (e.g. 0.95).
pub fn wilson_ci(successes: u64, trials: u64, level: f64) -> Result<EstimateReport> {
    if trials == 0 {
        return Err(Error::invalid("trials", "must be at least 1"));
    }
    if successes > trials {
        return Err(Error::invalid("successes", "cannot exceed trials"));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::invalid("level", "must lie in (0, 1)"));
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z = z_quantile(level);
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let ci_low = if successes == 0 { 0.0 } else { (center - half).clamp(0.0, p) };
    let ci_high = if successes == trials { 1.0 } else { (center + half).clamp(p, 1.0) };
    Ok(EstimateReport {
        trials,
        successes,
        p_hat: p,
        ci_low,
        ci_high,
        level,
        excluded_boundary: 0,
        horizon_note: String::new(),
    })
}
