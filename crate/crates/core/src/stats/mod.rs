//! Estimators, goodness-of-fit tests and replica orchestration.

mod autocorr;
mod decay;
mod experiment;
mod geometric;
mod ks;
mod normality;
mod proportion;
mod speed;

pub use autocorr::{lag_autocorrelation, pooled_lag_autocorrelation};
pub use decay::{decay_fit, DecayFit, DecayPoint};
pub use experiment::{run_experiment, Execution, Experiment};
pub use geometric::{geometric_fit, GeometricFit};
pub use ks::{kolmogorov_q, ks_statistic, ks_two_sample};
pub use normality::{anderson_darling, normality_test};
pub use proportion::{wilson_ci, EstimateReport};
pub use speed::{edge_speed, EdgeSpeed};

use serde::{Deserialize, Serialize};

/// Significance level used by the acceptance gates.
pub const DEFAULT_LEVEL: f64 = 0.01;

/// Outcome of a hypothesis test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub test: String,
    pub statistic: f64,
    pub p_value: f64,
    pub sample_sizes: Vec<usize>,
    pub level: f64,
    pub reject: bool,
}

impl TestReport {
    pub fn new(test: &str, statistic: f64, p_value: f64, sample_sizes: Vec<usize>, level: f64) -> Self {
        let p_value = p_value.clamp(0.0, 1.0);
        TestReport {
            test: test.to_string(),
            statistic,
            p_value,
            sample_sizes,
            level,
            reject: p_value < level,
        }
    }

    /// Same test re-judged at another level.
    pub fn at_level(mut self, level: f64) -> Self {
        self.level = level;
        self.reject = self.p_value < level;
        self
    }
}
