use std::io::Write;

use serde::{Deserialize, Serialize};

use super::events::{extinction_and_speed_events, row_sites, scan_consecutive_runs, DeficitVariant};
use super::field::{gen_field, PercConfig, PercField};
use super::run::{evolve_percolation, origin_run, PercStart};
use crate::error::{Error, Result};
use crate::stats::{run_experiment, wilson_ci, DecayPoint, EstimateReport, Execution};

fn check_rows(config: &PercConfig, ns: &[u32]) -> Result<()> {
    if ns.is_empty() || ns.iter().any(|&n| n == 0 || n > config.n_max) {
        return Err(Error::invalid("n", format!("rows must lie in [1, {}]", config.n_max)));
    }
    Ok(())
}

fn per_replica<T: Send>(
    config: &PercConfig,
    replicas: u64,
    exec: Execution,
    f: impl Fn(&PercField) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    config.validate()?;
    run_experiment(
        &|_, seed| f(&gen_field(config.with_seed(seed))?),
        replicas,
        config.seed,
        exec,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeficitSpec {
    /// `Y = X(n) ∩ [-f n, f n]`.
    pub fraction: f64,
    pub variant: DeficitVariant,
}

/// Raw occupation counts in `Y` for one row across replicas, so that any
/// threshold can be applied afterwards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeficitRaw {
    pub n: u32,
    pub size_y: usize,
    /// `None` where the variant's side condition fails (origin run empty
    /// at row `n`).
    pub counts: Vec<Option<u32>>,
}

impl DeficitRaw {
    pub fn successes(&self, rho: f64) -> u64 {
        let limit = rho * self.size_y as f64;
        self.counts.iter().flatten().filter(|&&c| (c as f64) < limit).count() as u64
    }

    pub fn trials(&self) -> u64 {
        self.counts.len() as u64
    }
}

pub fn deficit_counts(
    config: &PercConfig,
    ns: &[u32],
    spec: DeficitSpec,
    replicas: u64,
    exec: Execution,
) -> Result<Vec<DeficitRaw>> {
    check_rows(config, ns)?;
    let ys: Vec<Vec<i64>> = ns
        .iter()
        .map(|&n| row_sites(n, -spec.fraction * n as f64, spec.fraction * n as f64))
        .collect();
    if ys.iter().any(|y| y.is_empty()) {
        return Err(Error::invalid("fraction", "Y is empty for some row"));
    }
    if spec.variant == DeficitVariant::EvenLattice {
        let hw = config.half_width();
        if let Some((n, _)) = ns.iter().zip(&ys).find(|(&n, y)| y.iter().any(|s| s.abs() > hw - n as i64)) {
            return Err(Error::invalid("extent", format!("Y at row {n} leaves the exact region")));
        }
    }
    let rows = per_replica(config, replicas, exec, |field| {
        let run = match spec.variant {
            DeficitVariant::OriginAlive => origin_run(field)?,
            DeficitVariant::EvenLattice => evolve_percolation(field, &PercStart::EvenLattice, field.n_max())?,
        };
        Ok(ns
            .iter()
            .zip(&ys)
            .map(|(&n, y)| {
                if spec.variant == DeficitVariant::OriginAlive && run.level(n).is_empty() {
                    None
                } else {
                    Some(y.iter().filter(|&&s| run.contains(s, n)).count() as u32)
                }
            })
            .collect::<Vec<_>>())
    })?;
    Ok(ns
        .iter()
        .zip(&ys)
        .enumerate()
        .map(|(i, (&n, y))| DeficitRaw {
            n,
            size_y: y.len(),
            counts: rows.iter().map(|r| r[i]).collect(),
        })
        .collect())
}

/// Per row: replicas with `n <= τ < n_max`.
pub fn extinction_counts(config: &PercConfig, ns: &[u32], replicas: u64, exec: Execution) -> Result<Vec<(u32, u64, u64)>> {
    check_rows(config, ns)?;
    let flags = per_replica(config, replicas, exec, |field| {
        let run = origin_run(field)?;
        Ok(ns.iter().map(|&n| extinction_and_speed_events(&run, n, 0.5).0).collect::<Vec<_>>())
    })?;
    Ok(tally_flags(ns, &flags))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanSpec {
    pub b: f64,
    pub beta: f64,
    pub rho: f64,
}

/// Per row: replicas where the consecutive-run scan fires.
pub fn scan_counts(
    config: &PercConfig,
    ns: &[u32],
    spec: ScanSpec,
    replicas: u64,
    exec: Execution,
) -> Result<Vec<(u32, u64, u64)>> {
    check_rows(config, ns)?;
    let flags = per_replica(config, replicas, exec, |field| {
        let run = origin_run(field)?;
        ns.iter()
            .map(|&n| scan_consecutive_runs(&run, n, spec.b, spec.beta, spec.rho))
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(tally_flags(ns, &flags))
}

fn tally_flags(ns: &[u32], flags: &[Vec<bool>]) -> Vec<(u32, u64, u64)> {
    ns.iter()
        .enumerate()
        .map(|(i, &n)| {
            let hits = flags.iter().filter(|f| f[i]).count() as u64;
            (n, hits, flags.len() as u64)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayRow {
    pub n: u32,
    pub report: EstimateReport,
}

impl DecayRow {
    pub fn point(&self) -> DecayPoint {
        DecayPoint {
            n: self.n as f64,
            p_hat: self.report.p_hat,
            trials: self.report.trials,
        }
    }
}

/// `(n, successes, trials)` rows to estimates with Wilson intervals.
pub fn decay_table(counts: &[(u32, u64, u64)], note: &str) -> Result<Vec<DecayRow>> {
    counts
        .iter()
        .map(|&(n, s, t)| {
            Ok(DecayRow {
                n,
                report: wilson_ci(s, t, 0.95)?.with_note(note),
            })
        })
        .collect()
}

/// Writes `n,trials,successes,p_hat,ci_low,ci_high`.
pub fn write_decay_csv<W: Write>(rows: &[DecayRow], w: W) -> Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(["n", "trials", "successes", "p_hat", "ci_low", "ci_high"])?;
    for r in rows {
        csv.write_record([
            r.n.to_string(),
            r.report.trials.to_string(),
            r.report.successes.to_string(),
            r.report.p_hat.to_string(),
            r.report.ci_low.to_string(),
            r.report.ci_high.to_string(),
        ])?;
    }
    csv.flush()?;
    Ok(())
}
