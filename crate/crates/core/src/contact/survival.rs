use serde::{Deserialize, Serialize};

use super::engine::Process;
use super::trajectory::{floor_for, Configuration};
use crate::error::{Error, Result};
use crate::graph::{build_event_log, EdgeMask, EventLog, LogView, SimConfig};
use crate::stats::{run_experiment, wilson_ci, EstimateReport, Execution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SurvivalOutcome {
    Survived,
    Died,
    /// The window edge may have mattered before the outcome was settled.
    Contaminated,
}

/// Runs `initial` until extinction, contamination or the horizon.
pub fn survival_outcome(view: LogView<'_>, initial: &Configuration, horizon: f64) -> Result<SurvivalOutcome> {
    let mut p = Process::new(view, initial.iter(), 0.0, horizon)?.track_boundary(floor_for(view.log));
    loop {
        if p.contaminated_at().is_some() {
            return Ok(SurvivalOutcome::Contaminated);
        }
        if p.is_empty() {
            return Ok(SurvivalOutcome::Died);
        }
        if p.step().is_none() {
            break;
        }
    }
    p.settle(horizon);
    Ok(if p.contaminated_at().is_some() {
        SurvivalOutcome::Contaminated
    } else {
        SurvivalOutcome::Survived
    })
}

pub(crate) fn horizon_note(what: &str, horizon: f64) -> String {
    format!(
        "{what} on [0, {horizon}]; the event shrinks as the horizon grows, so this overestimates the infinite-horizon probability"
    )
}

pub(crate) fn tally(successes: u64, trials: u64, excluded: u64, level: f64, note: String) -> Result<EstimateReport> {
    if trials == 0 {
        return Err(Error::InsufficientData(format!(
            "all {excluded} replicas were boundary-contaminated"
        )));
    }
    Ok(wilson_ci(successes, trials, level)?.with_excluded(excluded).with_note(note))
}

/// Fraction of replicas alive at the horizon. Replica `i` uses the log of
/// `config` reseeded with the `i`-th derived seed; contaminated replicas
/// are excluded and counted.
pub fn survival_estimate(
    config: &SimConfig,
    mask: EdgeMask,
    initial: &Configuration,
    replicas: u64,
    exec: Execution,
) -> Result<EstimateReport> {
    let outcomes = run_experiment(
        &|_, seed| {
            let log = build_event_log(config.with_seed(seed))?;
            survival_outcome(log.view(mask), initial, config.horizon)
        },
        replicas,
        config.seed,
        exec,
    )?;
    let excluded = outcomes.iter().filter(|o| **o == SurvivalOutcome::Contaminated).count() as u64;
    let survived = outcomes.iter().filter(|o| **o == SurvivalOutcome::Survived).count() as u64;
    tally(survived, replicas - excluded, excluded, 0.95, horizon_note("survival", config.horizon))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub mu: f64,
    pub full: EstimateReport,
    pub half: EstimateReport,
}

/// Survival on both graphs at several rates, all rates of one replica
/// sharing deaths and thinned arrows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalSweep {
    pub points: Vec<SweepPoint>,
    /// Replicas where survival at some rate failed to imply survival at a
    /// higher rate (either graph).
    pub monotonicity_violations: u64,
    /// Replicas where the half-line graph survived but the full graph did not.
    pub domination_violations: u64,
    pub excluded_boundary: u64,
    pub replicas: u64,
}

/// `config.mu` is the top rate; every entry of `mus` must lie in
/// `(0, config.mu]`.
pub fn survival_sweep(
    config: &SimConfig,
    mus: &[f64],
    initial: &Configuration,
    replicas: u64,
    exec: Execution,
) -> Result<SurvivalSweep> {
    let mut mus = mus.to_vec();
    mus.sort_by(f64::total_cmp);
    if mus.is_empty() || mus[0] <= 0.0 || mus[mus.len() - 1] > config.mu {
        return Err(Error::invalid("mu", format!("sweep rates must lie in (0, {}]", config.mu)));
    }
    let rows = run_experiment(
        &|_, seed| {
            let top = build_event_log(config.with_seed(seed))?;
            let mut row = Vec::with_capacity(mus.len());
            for &mu in &mus {
                let thin;
                let log: &EventLog = if mu == config.mu {
                    &top
                } else {
                    thin = top.thinned(mu)?;
                    &thin
                };
                let full = survival_outcome(log.view(EdgeMask::FullGraph), initial, config.horizon)?;
                let half = survival_outcome(log.view(EdgeMask::HalfLine), initial, config.horizon)?;
                row.push((full, half));
            }
            Ok(row)
        },
        replicas,
        config.seed,
        exec,
    )?;
    use SurvivalOutcome::*;
    let clean: Vec<&Vec<(SurvivalOutcome, SurvivalOutcome)>> = rows
        .iter()
        .filter(|r| r.iter().all(|&(f, h)| f != Contaminated && h != Contaminated))
        .collect();
    let excluded = replicas - clean.len() as u64;
    let mut monotonicity_violations = 0;
    let mut domination_violations = 0;
    for r in &clean {
        let full_ok = r.windows(2).all(|w| w[0].0 != Survived || w[1].0 == Survived);
        let half_ok = r.windows(2).all(|w| w[0].1 != Survived || w[1].1 == Survived);
        monotonicity_violations += u64::from(!(full_ok && half_ok));
        domination_violations += u64::from(r.iter().any(|&(f, h)| h == Survived && f != Survived));
    }
    let trials = clean.len() as u64;
    let points = mus
        .iter()
        .enumerate()
        .map(|(k, &mu)| {
            let count = |half: bool| {
                clean
                    .iter()
                    .filter(|r| (if half { r[k].1 } else { r[k].0 }) == Survived)
                    .count() as u64
            };
            let note = horizon_note("survival", config.horizon);
            Ok(SweepPoint {
                mu,
                full: tally(count(false), trials, excluded, 0.95, note.clone())?,
                half: tally(count(true), trials, excluded, 0.95, note)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SurvivalSweep {
        points,
        monotonicity_violations,
        domination_violations,
        excluded_boundary: excluded,
        replicas,
    })
}

/// Right endpoints at the horizon of the surviving `{0}` starts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeSample {
    pub horizon: f64,
    pub values: Vec<i64>,
    pub extinct: u64,
    pub excluded_boundary: u64,
}

impl EdgeSample {
    /// `(r_T - a T) / (s sqrt(T))` with `a`, `s` the sample mean speed and
    /// the sample standard deviation per unit root time.
    pub fn standardized(&self) -> Result<Vec<f64>> {
        let n = self.values.len();
        if n < 2 {
            return Err(Error::InsufficientData(format!("{n} surviving runs")));
        }
        let t = self.horizon;
        let xs: Vec<f64> = self.values.iter().map(|&r| r as f64).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
        if !(sd > 0.0) {
            return Err(Error::Degenerate("all endpoints equal".into()));
        }
        let alpha = mean / t;
        let sigma = sd / t.sqrt();
        Ok(xs.iter().map(|x| (x - alpha * t) / (sigma * t.sqrt())).collect())
    }
}

pub fn right_edge_sample(config: &SimConfig, replicas: u64, exec: Execution) -> Result<EdgeSample> {
    let out = run_experiment(
        &|_, seed| {
            let log = build_event_log(config.with_seed(seed))?;
            let tr = super::evolve(log.view(EdgeMask::FullGraph), &Configuration::single(0), config.horizon)?;
            Ok(match (tr.survived(), tr.boundary_contaminated()) {
                (_, true) => SurvivalOutcomeWith::Contaminated,
                (false, _) => SurvivalOutcomeWith::Died,
                (true, false) => SurvivalOutcomeWith::Survived(tr.sup_series().last().and_then(|s| s.1).expect("alive")),
            })
        },
        replicas,
        config.seed,
        exec,
    )?;
    let mut sample = EdgeSample {
        horizon: config.horizon,
        values: Vec::new(),
        extinct: 0,
        excluded_boundary: 0,
    };
    for o in out {
        match o {
            SurvivalOutcomeWith::Survived(r) => sample.values.push(r),
            SurvivalOutcomeWith::Died => sample.extinct += 1,
            SurvivalOutcomeWith::Contaminated => sample.excluded_boundary += 1,
        }
    }
    Ok(sample)
}

enum SurvivalOutcomeWith {
    Survived(i64),
    Died,
    Contaminated,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_start_dies_at_once() {
        let cfg = SimConfig::new(1.0, 1, 1.0, 0).with_window(-5, 5);
        let log = build_event_log(cfg).unwrap();
        let out = survival_outcome(log.view(EdgeMask::FullGraph), &Configuration::default(), 1.0).unwrap();
        assert_eq!(out, SurvivalOutcome::Died);
    }

    #[test]
    fn deterministic_report() {
        let cfg = SimConfig::new(2.0, 1, 10.0, 3);
        let a = survival_estimate(&cfg, EdgeMask::FullGraph, &Configuration::single(0), 20, Execution::Parallel).unwrap();
        let b = survival_estimate(&cfg, EdgeMask::FullGraph, &Configuration::single(0), 20, Execution::Sequential).unwrap();
        assert_eq!(a, b);
    }
}
