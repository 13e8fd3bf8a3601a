use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeding::{splitmix64, stream_rng};

const FIELD_TAG: u64 = 0x0050_4552_434f_4c41;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldMode {
    /// `w` i.i.d. Bernoulli(1 - ε).
    Independent,
    /// `w(y, n) = η(y - 1, n) η(y + 1, n)` with `η` i.i.d.
    /// Bernoulli(sqrt(1 - ε)).
    OneDependent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PercConfig {
    pub epsilon: f64,
    pub mode: FieldMode,
    pub n_max: u32,
    /// Largest `|y|` of a start on row 0.
    pub extent: u32,
    pub seed: u64,
}

impl PercConfig {
    pub fn new(epsilon: f64, mode: FieldMode, n_max: u32, seed: u64) -> Self {
        PercConfig {
            epsilon,
            mode,
            n_max,
            extent: 0,
            seed,
        }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        PercConfig { seed, ..self }
    }

    pub fn with_extent(self, extent: u32) -> Self {
        PercConfig { extent, ..self }
    }

    /// Columns run over `[-half_width, half_width]`.
    pub fn half_width(&self) -> i64 {
        self.n_max as i64 + self.extent as i64 + 2
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon >= 0.0 && self.epsilon < 1.0) {
            return Err(Error::invalid("epsilon", format!("must lie in [0, 1), got {}", self.epsilon)));
        }
        if self.n_max == 0 {
            return Err(Error::invalid("n_max", "must be positive"));
        }
        Ok(())
    }
}

/// Openness of the sites `(y, n)`, `y + n` even, `1 <= n <= n_max`,
/// `|y| <= half_width`. Everything else reads as closed.
#[derive(Debug, Clone, PartialEq)]
pub struct PercField {
    config: PercConfig,
    half_width: i64,
    /// Row `n` lives at `w[n - 1]`, column `y` at `y + half_width`.
    w: Vec<Vec<bool>>,
    /// Latent variables at `y + n` odd, column `y` at `y + half_width + 1`.
    eta: Option<Vec<Vec<bool>>>,
}

impl PercField {
    pub fn config(&self) -> &PercConfig {
        &self.config
    }

    pub fn half_width(&self) -> i64 {
        self.half_width
    }

    pub fn n_max(&self) -> u32 {
        self.config.n_max
    }

    #[inline]
    pub fn w(&self, y: i64, n: u32) -> bool {
        if n == 0 || n > self.config.n_max || y.abs() > self.half_width || (y + n as i64) % 2 != 0 {
            return false;
        }
        self.w[n as usize - 1][(y + self.half_width) as usize]
    }

    pub fn eta(&self, y: i64, n: u32) -> Option<bool> {
        let eta = self.eta.as_ref()?;
        if n == 0 || n > self.config.n_max || y.abs() > self.half_width + 1 || (y + n as i64) % 2 == 0 {
            return None;
        }
        Some(eta[n as usize - 1][(y + self.half_width + 1) as usize])
    }

    /// Field with `w` given by `open`, for hand-built scenarios.
    pub fn from_fn(config: PercConfig, open: impl Fn(i64, u32) -> bool) -> Result<Self> {
        config.validate()?;
        let hw = config.half_width();
        let w = (1..=config.n_max)
            .map(|n| (-hw..=hw).map(|y| (y + n as i64) % 2 == 0 && open(y, n)).collect())
            .collect();
        Ok(PercField {
            config,
            half_width: hw,
            w,
            eta: None,
        })
    }
}

/// Samples the field row by row; row `n` uses its own stream.
pub fn gen_field(config: PercConfig) -> Result<PercField> {
    config.validate()?;
    let hw = config.half_width();
    let key = splitmix64(config.seed ^ FIELD_TAG);
    let mut w = Vec::with_capacity(config.n_max as usize);
    let mut eta_rows = Vec::new();
    for n in 1..=config.n_max {
        let mut rng = stream_rng(key, n as u64);
        let odd = |y: i64| (y + n as i64) % 2 != 0;
        match config.mode {
            FieldMode::Independent => {
                let p = 1.0 - config.epsilon;
                w.push((-hw..=hw).map(|y| !odd(y) && rng.random_bool(p)).collect::<Vec<bool>>());
            }
            FieldMode::OneDependent => {
                let q = (1.0 - config.epsilon).sqrt();
                let eta: Vec<bool> = (-hw - 1..=hw + 1).map(|y| odd(y) && rng.random_bool(q)).collect();
                let row = (-hw..=hw)
                    .map(|y| {
                        let i = (y + hw + 1) as usize;
                        !odd(y) && eta[i - 1] && eta[i + 1]
                    })
                    .collect();
                w.push(row);
                eta_rows.push(eta);
            }
        }
    }
    Ok(PercField {
        config,
        half_width: hw,
        w,
        eta: (config.mode == FieldMode::OneDependent).then_some(eta_rows),
    })
}
