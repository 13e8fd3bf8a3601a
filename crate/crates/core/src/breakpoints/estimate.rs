use serde::{Deserialize, Serialize};

use super::cse::BandEvaluator;
use super::psi::{increments, psi_sequence_with, IncrementSample, PsiOptions};
use super::restart::{restart_construction_with, RestartRecord};
use crate::contact::{horizon_note, tally};
use crate::error::{Error, Result};
use crate::graph::{build_event_log, SimConfig};
use crate::stats::{run_experiment, EstimateReport, Execution};

/// Probability that `0 × 0` controls subsequent edges up to each horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CseEstimate {
    pub horizons: Vec<f64>,
    pub reports: Vec<EstimateReport>,
    /// Per replica: `None` if excluded (window edge touched), otherwise the
    /// first violation time (`Some(None)`: none up to the largest horizon).
    pub violations: Vec<Option<Option<f64>>>,
}

/// One evaluation per replica up to `config.horizon`; each entry of
/// `horizons` (at most `config.horizon`) reads off the same realization,
/// so the estimates are nested.
pub fn cse_probability(
    config: &SimConfig,
    horizons: &[f64],
    replicas: u64,
    exec: Execution,
) -> Result<CseEstimate> {
    if horizons.iter().any(|&t| !(t > 0.0 && t <= config.horizon)) {
        return Err(Error::invalid("horizon", format!("horizons must lie in (0, {}]", config.horizon)));
    }
    let eval = BandEvaluator::default();
    let violations = run_experiment(
        &|_, seed| {
            let log = build_event_log(config.with_seed(seed))?;
            let out = eval.evaluate(&log, 0, 0.0, config.horizon)?;
            Ok((!out.edge_touched).then_some(out.violation))
        },
        replicas,
        config.seed,
        exec,
    )?;
    let kept: Vec<Option<f64>> = violations.iter().flatten().copied().collect();
    let excluded = replicas - kept.len() as u64;
    let reports = horizons
        .iter()
        .map(|&t| {
            let ok = kept.iter().filter(|v| v.is_none_or(|v| v > t)).count() as u64;
            tally(ok, kept.len() as u64, excluded, 0.95, horizon_note("0 x 0 c.s.e.", t))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CseEstimate {
        horizons: horizons.to_vec(),
        reports,
        violations,
    })
}

/// Restart records of every replica whose window edge stayed out of play.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartSample {
    pub records: Vec<RestartRecord>,
    pub excluded_boundary: u64,
}

impl RestartSample {
    /// `N` of the uncensored records.
    pub fn attempts(&self) -> Vec<u64> {
        self.records.iter().filter(|r| !r.censored).map(|r| r.n).collect()
    }
}

pub fn restart_sample(config: &SimConfig, replicas: u64, opts: &PsiOptions, exec: Execution) -> Result<RestartSample> {
    let out = run_experiment(
        &|_, seed| {
            let log = build_event_log(config.with_seed(seed))?;
            restart_construction_with(&log, config.horizon, opts)
        },
        replicas,
        config.seed,
        exec,
    )?;
    let excluded = out.iter().filter(|r| r.window_suspect).count() as u64;
    Ok(RestartSample {
        records: out.into_iter().filter(|r| !r.window_suspect).collect(),
        excluded_boundary: excluded,
    })
}

/// Increments of the break points of each surviving replica.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncrementStudy {
    /// One sequence per surviving, unflagged replica with at least two
    /// uncensored points.
    pub runs: Vec<IncrementSample>,
    pub extinct: u64,
    pub excluded_boundary: u64,
}

impl IncrementStudy {
    pub fn pooled(&self) -> IncrementSample {
        let mut all = IncrementSample::default();
        for r in &self.runs {
            all.extend(r);
        }
        all
    }

    /// Pools the first and the second half (in time) of every run
    /// separately.
    pub fn halves(&self) -> (IncrementSample, IncrementSample) {
        let (mut a, mut b) = (IncrementSample::default(), IncrementSample::default());
        for r in &self.runs {
            let mid = r.pairs.len() / 2;
            a.pairs.extend_from_slice(&r.pairs[..mid]);
            b.pairs.extend_from_slice(&r.pairs[mid..]);
        }
        (a, b)
    }
}

pub fn increment_study(config: &SimConfig, replicas: u64, opts: &PsiOptions, exec: Execution) -> Result<IncrementStudy> {
    let out = run_experiment(
        &|_, seed| {
            let log = build_event_log(config.with_seed(seed))?;
            psi_sequence_with(&log, config.horizon, opts)
        },
        replicas,
        config.seed,
        exec,
    )?;
    let mut study = IncrementStudy {
        runs: Vec::new(),
        extinct: 0,
        excluded_boundary: 0,
    };
    for s in out {
        if s.base_extinct_at.is_some() {
            study.extinct += 1;
        } else if s.window_suspect {
            study.excluded_boundary += 1;
        } else if let Ok(inc) = increments(&s) {
            study.runs.push(inc);
        }
    }
    Ok(study)
}
