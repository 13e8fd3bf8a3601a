use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported interaction range. Arrow offsets are stored as `i8`.
pub const MAX_RANGE: u32 = 127;

const SITE_LIMIT: i64 = (i32::MAX as i64) - 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Arrow rate per directed edge.
    pub mu: f64,
    /// Interaction range `M`.
    #[serde(rename = "M")]
    pub range: u32,
    pub x_min: i64,
    pub x_max: i64,
    pub horizon: f64,
    pub seed: u64,
}

impl SimConfig {
    /// Config whose window follows the margin rule `±ceil(factor·M·μ·T)`.
    pub fn with_margin(mu: f64, range: u32, horizon: f64, seed: u64, factor: f64) -> Self {
        let half = margin_half_width(mu, range, horizon, factor);
        SimConfig {
            mu,
            range,
            x_min: -half,
            x_max: half,
            horizon,
            seed,
        }
    }

    /// [`SimConfig::with_margin`] with the default factor 3.
    pub fn new(mu: f64, range: u32, horizon: f64, seed: u64) -> Self {
        Self::with_margin(mu, range, horizon, seed, 3.0)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_window(mut self, x_min: i64, x_max: i64) -> Self {
        self.x_min = x_min;
        self.x_max = x_max;
        self
    }

    /// The same config on a window twice as wide on both sides.
    pub fn doubled_window(mut self) -> Self {
        self.x_min *= 2;
        self.x_max *= 2;
        self
    }

    pub fn width(&self) -> usize {
        (self.x_max - self.x_min + 1) as usize
    }

    pub fn contains(&self, site: i64) -> bool {
        site >= self.x_min && site <= self.x_max
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu.is_finite() && self.mu > 0.0) {
            return Err(Error::invalid("mu", format!("must be positive and finite, got {}", self.mu)));
        }
        if self.range == 0 || self.range > MAX_RANGE {
            return Err(Error::invalid(
                "M",
                format!("must lie in 1..={MAX_RANGE}, got {}", self.range),
            ));
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(Error::invalid(
                "horizon",
                format!("must be positive and finite, got {}", self.horizon),
            ));
        }
        if self.x_min >= self.x_max {
            return Err(Error::invalid(
                "window",
                format!("x_min {} must be below x_max {}", self.x_min, self.x_max),
            ));
        }
        if self.x_min < -SITE_LIMIT || self.x_max > SITE_LIMIT {
            return Err(Error::invalid("window", "sites must fit in 32 bits"));
        }
        let need = 2 * self.range as i64 + 1;
        if self.x_max - self.x_min + 1 < need {
            return Err(Error::invalid(
                "window",
                format!("width must be at least 2M+1 = {need}"),
            ));
        }
        Ok(())
    }
}

pub(crate) fn margin_half_width(mu: f64, range: u32, horizon: f64, factor: f64) -> i64 {
    let half = (factor * range as f64 * mu * horizon).ceil() as i64;
    half.max(range as i64 + 1)
}
