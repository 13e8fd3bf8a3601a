//! The flat run configuration: one TOML table of scalar and list keys,
//! every key optional.
//!
//! | key | default | meaning |
//! |---|---|---|
//! | `mu` | 3.0 | arrow rate per directed edge (top rate of a sweep) |
//! | `M` | 1 | interaction range |
//! | `horizon` | 100.0 | time horizon `T` |
//! | `seed` | 7 | master seed |
//! | `replicas` | 1000 | Monte Carlo replicas |
//! | `x_min`, `x_max` | margin rule | window; default `±ceil(margin_factor·M·μ·T)` |
//! | `margin_factor` | 3.0 | factor of the margin rule |
//! | `mask` | `full_graph` | `full_graph` or `half_line` (survival) |
//! | `mus` | `[]` | survival sweep rates; empty means a single estimate |
//! | `horizons` | `[]` | endpoint-equality horizons; empty means `[horizon]` |
//! | `agreement_set` | `[0, -1]` | the finite set `F` of the agreement event |
//! | `from_time` | 0.0 | agreement is checked on `[from_time, horizon]` |
//! | `shape_a`, `shape_t0` | 0.1, 20.0 | speed and start of the shape check |
//! | `psi_margin` | `horizon/4` | verification margin of break points |
//! | `epsilon` | 0.1 | percolation closed density |
//! | `field_mode` | `one_dependent` | `independent` or `one_dependent` |
//! | `n_max` | 50 | percolation rows |
//! | `extent` | 0 | extra columns on each side of the light cone |
//! | `rows` | `[]` | rows for deficit-decay and scan-runs; empty means a per-command default |
//! | `rho` | 0.2 | density threshold |
//! | `y_fraction` | 0.5 | `Y = X(n) ∩ [-f n, f n]` |
//! | `deficit_variant` | `origin_alive` | `origin_alive` or `even_lattice` |
//! | `deficit_event` | `deficit` | `deficit` or `extinction_tail` |
//! | `scan_b`, `scan_beta` | 0.1, 0.5 | block fraction and cone fraction of scan-runs |
//! | `contamination_warn` | 0.05 | excluded fraction above which the manifest carries a warning |
//! | `execution` | `parallel` | `parallel` or `sequential`; outputs do not depend on it |

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use edgebreak::graph::{EdgeMask, SimConfig};
use edgebreak::percolation::{DeficitVariant, FieldMode, PercConfig};
use edgebreak::stats::Execution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaskKey {
    FullGraph,
    HalfLine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeKey {
    Independent,
    OneDependent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantKey {
    OriginAlive,
    EvenLattice,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeficitEvent {
    Deficit,
    ExtinctionTail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExecKey {
    Parallel,
    Sequential,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub mu: f64,
    #[serde(rename = "M")]
    pub range: u32,
    pub horizon: f64,
    pub seed: u64,
    pub replicas: u64,
    pub x_min: Option<i64>,
    pub x_max: Option<i64>,
    pub margin_factor: f64,
    pub mask: MaskKey,
    pub mus: Vec<f64>,
    pub horizons: Vec<f64>,
    pub agreement_set: Vec<i64>,
    pub from_time: f64,
    pub shape_a: f64,
    pub shape_t0: f64,
    pub psi_margin: Option<f64>,
    pub epsilon: f64,
    pub field_mode: ModeKey,
    pub n_max: u32,
    pub extent: u32,
    pub rows: Vec<u32>,
    pub rho: f64,
    pub y_fraction: f64,
    pub deficit_variant: VariantKey,
    pub deficit_event: DeficitEvent,
    pub scan_b: f64,
    pub scan_beta: f64,
    pub contamination_warn: f64,
    pub execution: ExecKey,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            mu: 3.0,
            range: 1,
            horizon: 100.0,
            seed: 7,
            replicas: 1000,
            x_min: None,
            x_max: None,
            margin_factor: 3.0,
            mask: MaskKey::FullGraph,
            mus: Vec::new(),
            horizons: Vec::new(),
            agreement_set: vec![0, -1],
            from_time: 0.0,
            shape_a: 0.1,
            shape_t0: 20.0,
            psi_margin: None,
            epsilon: 0.1,
            field_mode: ModeKey::OneDependent,
            n_max: 50,
            extent: 0,
            rows: Vec::new(),
            rho: 0.2,
            y_fraction: 0.5,
            deficit_variant: VariantKey::OriginAlive,
            deficit_event: DeficitEvent::Deficit,
            scan_b: 0.1,
            scan_beta: 0.5,
            contamination_warn: 0.05,
            execution: ExecKey::Parallel,
        }
    }
}

/// Parses and validates a config. Missing keys take their defaults and
/// the window is filled in from the margin rule, so the result is the
/// full effective configuration.
pub fn parse_config(source: &str) -> Result<Config> {
    let mut cfg: Config = toml::from_str(source).context("config")?;
    cfg.fill_window();
    cfg.validate()?;
    Ok(cfg)
}

fn check(ok: bool, field: &str, rule: &str) -> Result<()> {
    if !ok {
        bail!("invalid {field}: {rule}");
    }
    Ok(())
}

impl Config {
    /// Applies the margin rule to any missing window end.
    pub fn fill_window(&mut self) {
        let rule = SimConfig::with_margin(self.mu, self.range.max(1), self.horizon, self.seed, self.margin_factor);
        self.x_min.get_or_insert(rule.x_min);
        self.x_max.get_or_insert(rule.x_max);
    }

    pub fn validate(&self) -> Result<()> {
        check(self.mu.is_finite() && self.mu > 0.0, "mu", "must be positive")?;
        check(self.horizon.is_finite() && self.horizon > 0.0, "horizon", "must be positive")?;
        check(self.margin_factor > 0.0, "margin_factor", "must be positive")?;
        check(self.replicas >= 1, "replicas", "must be at least 1")?;
        self.sim().validate()?;
        let (lo, hi) = (self.x_min.unwrap_or(0), self.x_max.unwrap_or(0));
        check(lo <= -(self.range as i64) && hi >= self.range as i64, "window", "must contain [-M, M]")?;
        check(self.mus.iter().all(|&m| m > 0.0 && m <= self.mu), "mus", "every rate must lie in (0, mu]")?;
        check(
            self.horizons.iter().all(|&t| t > 0.0 && t <= self.horizon),
            "horizons",
            "every horizon must lie in (0, horizon]",
        )?;
        check(!self.agreement_set.is_empty(), "agreement_set", "must be nonempty")?;
        check(
            self.agreement_set.iter().all(|&x| x <= 0 && x >= lo),
            "agreement_set",
            "sites must lie in [x_min, 0]",
        )?;
        check(self.from_time >= 0.0 && self.from_time <= self.horizon, "from_time", "must lie in [0, horizon]")?;
        check(self.shape_a > 0.0, "shape_a", "must be positive")?;
        check(self.shape_t0 >= 0.0, "shape_t0", "must be nonnegative")?;
        if let Some(m) = self.psi_margin {
            check(m >= 0.0 && m <= self.horizon, "psi_margin", "must lie in [0, horizon]")?;
        }
        check((0.0..1.0).contains(&self.epsilon), "epsilon", "must lie in [0, 1)")?;
        check(self.n_max >= 1, "n_max", "must be at least 1")?;
        check(self.rows.iter().all(|&n| n >= 1 && n <= self.n_max), "rows", "must lie in [1, n_max]")?;
        check(self.rho > 0.0 && self.rho < 1.0, "rho", "must lie in (0, 1)")?;
        check(self.y_fraction > 0.0 && self.y_fraction <= 1.0, "y_fraction", "must lie in (0, 1]")?;
        check(
            self.scan_beta > 0.0 && self.scan_beta < 1.0 && self.scan_b > 0.0 && self.scan_b <= self.scan_beta,
            "scan_b",
            "need 0 < scan_b <= scan_beta < 1",
        )?;
        check((0.0..=1.0).contains(&self.contamination_warn), "contamination_warn", "must lie in [0, 1]")?;
        Ok(())
    }

    /// The contact-process config. Call after [`Config::fill_window`].
    pub fn sim(&self) -> SimConfig {
        let rule = SimConfig::with_margin(self.mu, self.range, self.horizon, self.seed, self.margin_factor);
        rule.with_window(self.x_min.unwrap_or(rule.x_min), self.x_max.unwrap_or(rule.x_max))
    }

    pub fn perc(&self) -> PercConfig {
        let mode = match self.field_mode {
            ModeKey::Independent => FieldMode::Independent,
            ModeKey::OneDependent => FieldMode::OneDependent,
        };
        PercConfig::new(self.epsilon, mode, self.n_max, self.seed).with_extent(self.extent)
    }

    pub fn mask(&self) -> EdgeMask {
        match self.mask {
            MaskKey::FullGraph => EdgeMask::FullGraph,
            MaskKey::HalfLine => EdgeMask::HalfLine,
        }
    }

    pub fn variant(&self) -> DeficitVariant {
        match self.deficit_variant {
            VariantKey::OriginAlive => DeficitVariant::OriginAlive,
            VariantKey::EvenLattice => DeficitVariant::EvenLattice,
        }
    }

    pub fn exec(&self) -> Execution {
        match self.execution {
            ExecKey::Parallel => Execution::Parallel,
            ExecKey::Sequential => Execution::Sequential,
        }
    }

    /// The same run on a window twice as wide.
    pub fn doubled_window(&self) -> Config {
        let sim = self.sim().doubled_window();
        Config {
            x_min: Some(sim.x_min),
            x_max: Some(sim.x_max),
            ..self.clone()
        }
    }

    /// The effective config as TOML, suitable as a `--config` file.
    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }
}

/// The documented default table, one `key = value` line per key.
pub fn default_table() -> Result<String> {
    let mut cfg = Config::default();
    cfg.fill_window();
    cfg.to_toml()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = parse_config("mu = 3.0\nM = 1\nhorizon = 100\nseed = 7\n").unwrap();
        assert_eq!((cfg.x_min, cfg.x_max), (Some(-900), Some(900)));
        assert_eq!(cfg.replicas, 1000);
        assert_eq!(cfg.mask, MaskKey::FullGraph);
    }

    #[test]
    fn bad_values_name_the_field() {
        let e = parse_config("mu = -1.0").unwrap_err().to_string();
        assert!(e.contains("mu"), "{e}");
        let e = format!("{:#}", parse_config("mv = 3.0").unwrap_err());
        assert!(e.contains("unknown field `mv`"), "{e}");
        let e = parse_config("epsilon = 1.0").unwrap_err().to_string();
        assert!(e.contains("epsilon"), "{e}");
        let e = parse_config("x_min = -1\nx_max = 1\nM = 2").unwrap_err().to_string();
        assert!(e.contains("window"), "{e}");
    }

    #[test]
    fn toml_round_trip() {
        let cfg = parse_config("mu = 2.5\nmus = [1.0, 2.0]\nrows = [10, 20]\nn_max = 20").unwrap();
        assert_eq!(parse_config(&cfg.to_toml().unwrap()).unwrap(), cfg);
        assert_eq!(parse_config(&default_table().unwrap()).unwrap(), parse_config("").unwrap());
    }
}
