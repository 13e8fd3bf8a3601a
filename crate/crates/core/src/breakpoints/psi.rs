use std::io::Write;

use serde::{Deserialize, Serialize};

use super::cse::{cse_violation_naive, BandEvaluator, CseOutcome};
use crate::contact::{evolve, Configuration};
use crate::error::{Error, Result};
use crate::graph::{EdgeMask, EventLog};

/// How c.s.e. is decided and which candidate times are tried.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Evaluator {
    /// Whole-window processes at every event time of the log. Slow; kept
    /// as an oracle.
    Naive,
    /// Band evaluator at the reduced candidate set.
    Band(BandEvaluator),
}

impl Default for Evaluator {
    fn default() -> Self {
        Evaluator::Band(BandEvaluator::default())
    }
}

impl Evaluator {
    /// The naive evaluator works on the window as given and reports the
    /// edge as touched whenever the half-line start is truncated.
    pub fn evaluate(&self, log: &EventLog, x: i64, s: f64, horizon: f64) -> Result<CseOutcome> {
        match self {
            Evaluator::Naive => Ok(CseOutcome {
                violation: cse_violation_naive(log, x, s, horizon)?,
                edge_touched: true,
            }),
            Evaluator::Band(b) => b.evaluate(log, x, s, horizon),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PsiOptions {
    /// Points later than `horizon - margin` are flagged censored. Defaults
    /// to a quarter of the horizon.
    pub margin: Option<f64>,
    pub evaluator: Evaluator,
}

impl PsiOptions {
    pub fn margin_for(&self, horizon: f64) -> f64 {
        self.margin.unwrap_or(horizon / 4.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BreakPoint {
    pub k: usize,
    pub time: f64,
    pub position: i64,
    pub censored: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakPointSeries {
    pub points: Vec<BreakPoint>,
    pub horizon: f64,
    pub margin: f64,
    /// Some point lies in the verification margin.
    pub censored: bool,
    /// Extinction time of the `{0}` start; the series is empty when set.
    pub base_extinct_at: Option<f64>,
    /// The window edge may have influenced the base run or one of the
    /// c.s.e. evaluations.
    pub window_suspect: bool,
}

impl BreakPointSeries {
    pub fn uncensored(&self) -> impl Iterator<Item = &BreakPoint> {
        self.points.iter().filter(|p| !p.censored)
    }

    /// Writes `k,psi,r_psi,censored`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(["k", "psi", "r_psi", "censored"])?;
        for p in &self.points {
            csv.write_record([
                p.k.to_string(),
                p.time.to_string(),
                p.position.to_string(),
                p.censored.to_string(),
            ])?;
        }
        csv.flush()?;
        Ok(())
    }
}

/// Right-continuous step function of the `{0}` start's sup.
pub(crate) struct SupPath {
    times: Vec<f64>,
    values: Vec<Option<i64>>,
}

impl SupPath {
    pub(crate) fn new(series: Vec<(f64, Option<i64>)>) -> Self {
        let (times, values) = series.into_iter().unzip();
        SupPath { times, values }
    }

    pub(crate) fn at(&self, t: f64) -> Option<i64> {
        let i = self.times.partition_point(|&s| s <= t);
        self.values[i.max(1) - 1]
    }

    fn next_change_after(&self, t: f64) -> Option<f64> {
        let i = self.times.partition_point(|&s| s <= t);
        self.times.get(i).copied()
    }
}

/// First time after `t` at which `x × ·` may turn c.s.e.: a death at `x`,
/// or an arrow from `[x - M + 1, x]` landing above `x`. Between such
/// events (and with `x` fixed) c.s.e. can only be lost, never gained.
fn next_flip_event(log: &EventLog, x: i64, t: f64) -> Option<f64> {
    let m = log.range();
    let mut best: Option<f64> = None;
    for a in (x - m + 1).max(log.x_min())..=x {
        let (times, deltas) = log.timeline(a);
        let start = times.partition_point(|&s| s <= t);
        for i in start..times.len() {
            if best.is_some_and(|b| times[i] >= b) {
                break;
            }
            let d = deltas[i] as i64;
            if (d == 0 && a == x) || (d > 0 && a + d > x) {
                best = Some(times[i]);
                break;
            }
        }
    }
    best
}

pub fn psi_sequence(log: &EventLog, horizon: f64) -> Result<BreakPointSeries> {
    psi_sequence_with(log, horizon, &PsiOptions::default())
}

/// `ψ_k = inf{t >= 1 + ψ_{k-1} : r_t × t c.s.e.}` with `ψ_{-1} = 0`,
/// c.s.e. being checked up to `horizon`.
pub fn psi_sequence_with(log: &EventLog, horizon: f64, opts: &PsiOptions) -> Result<BreakPointSeries> {
    if horizon > log.horizon() {
        return Err(Error::Range {
            requested: horizon,
            available: log.horizon(),
        });
    }
    let margin = opts.margin_for(horizon);
    let base = evolve(log.view(EdgeMask::FullGraph), &Configuration::single(0), horizon)?;
    let path = SupPath::new(base.sup_series());
    let mut series = BreakPointSeries {
        points: Vec::new(),
        horizon,
        margin,
        censored: false,
        base_extinct_at: base.extinct_at,
        window_suspect: base.boundary_contaminated(),
    };
    if base.extinct_at.is_some() {
        return Ok(series);
    }
    let all_times: Vec<f64> = match opts.evaluator {
        Evaluator::Naive => {
            let mut v: Vec<f64> = log.events().iter().map(|e| e.time).collect();
            v.dedup();
            v
        }
        Evaluator::Band(_) => Vec::new(),
    };
    let mut from = 1.0;
    while from <= horizon {
        let mut t = from;
        let found = loop {
            let x = path.at(t).expect("base survives");
            let out = opts.evaluator.evaluate(log, x, t, horizon)?;
            series.window_suspect |= out.edge_touched;
            if out.violation.is_none() {
                break Some((t, x));
            }
            let next = match opts.evaluator {
                Evaluator::Naive => all_times.get(all_times.partition_point(|&s| s <= t)).copied(),
                Evaluator::Band(_) => [path.next_change_after(t), next_flip_event(log, x, t)]
                    .into_iter()
                    .flatten()
                    .min_by(f64::total_cmp),
            };
            match next {
                Some(n) if n <= horizon => t = n,
                _ => break None,
            }
        };
        let Some((time, position)) = found else { break };
        let censored = time > horizon - margin;
        series.censored |= censored;
        series.points.push(BreakPoint {
            k: series.points.len(),
            time,
            position,
            censored,
        });
        from = time + 1.0;
    }
    Ok(series)
}

/// Consecutive differences `(Δr, Δψ)` of the uncensored points.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IncrementSample {
    pub pairs: Vec<(i64, f64)>,
}

impl IncrementSample {
    pub fn dr(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.0 as f64).collect()
    }

    pub fn dpsi(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.1).collect()
    }

    pub fn extend(&mut self, other: &IncrementSample) {
        self.pairs.extend_from_slice(&other.pairs);
    }

    /// Writes `dr,dpsi`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(["dr", "dpsi"])?;
        for (dr, dt) in &self.pairs {
            csv.write_record([dr.to_string(), dt.to_string()])?;
        }
        csv.flush()?;
        Ok(())
    }
}

pub fn increments(series: &BreakPointSeries) -> Result<IncrementSample> {
    let pts: Vec<&BreakPoint> = series.uncensored().collect();
    if pts.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "{} uncensored break points, need 2",
            pts.len()
        )));
    }
    Ok(IncrementSample {
        pairs: pts
            .windows(2)
            .map(|w| (w[1].position - w[0].position, w[1].time - w[0].time))
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::SimConfig;

    fn series_of(points: &[(f64, i64)]) -> BreakPointSeries {
        BreakPointSeries {
            points: points
                .iter()
                .enumerate()
                .map(|(k, &(time, position))| BreakPoint { k, time, position, censored: false })
                .collect(),
            horizon: 10.0,
            margin: 0.0,
            censored: false,
            base_extinct_at: None,
            window_suspect: false,
        }
    }

    #[test]
    fn increments_by_hand() {
        let s = series_of(&[(1.0, 0), (2.0, 0), (3.0, 0)]);
        assert_eq!(increments(&s).unwrap().pairs, vec![(0, 1.0), (0, 1.0)]);
        let s = series_of(&[(1.0, 0), (2.5, 3)]);
        assert_eq!(increments(&s).unwrap().pairs, vec![(3, 1.5)]);
        assert!(increments(&series_of(&[(1.0, 0)])).is_err());
    }

    #[test]
    fn empty_log_gives_unit_spacing() {
        let cfg = SimConfig::new(1.0, 1, 8.0, 0).with_window(-4, 4);
        let log = EventLog::from_events(cfg, &[], &[]).unwrap();
        for evaluator in [Evaluator::Naive, Evaluator::default()] {
            let s = psi_sequence_with(&log, 8.0, &PsiOptions { margin: None, evaluator }).unwrap();
            let times: Vec<f64> = s.points.iter().map(|p| p.time).collect();
            assert_eq!(times, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]);
            assert!(s.points.iter().all(|p| p.position == 0));
            assert_eq!(s.uncensored().count(), 6);
        }
    }

    #[test]
    fn extinct_base_gives_empty_series() {
        let cfg = SimConfig::new(1.0, 1, 8.0, 0).with_window(-4, 4);
        let log = EventLog::from_events(cfg, &[(0, 0.5)], &[(0, 1, 0.7)]).unwrap();
        let s = psi_sequence(&log, 8.0).unwrap();
        assert!(s.points.is_empty());
        assert_eq!(s.base_extinct_at, Some(0.5));
    }
}
