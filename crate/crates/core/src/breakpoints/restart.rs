use serde::{Deserialize, Serialize};

use super::psi::{Evaluator, PsiOptions};
use crate::contact::Process;
use crate::error::{Error, Result};
use crate::graph::{EdgeMask, EventLog};

/// Bookkeeping of the restart chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartRecord {
    /// Extinction times `T_0, T_1, ...` of the restarted chain up to `σ_N`.
    pub extinction_times: Vec<f64>,
    /// `σ_1, ..., σ_N`.
    pub sigma: Vec<f64>,
    /// `τ_1, ..., τ_{N+1}`; the last entry is `None` (no overtaking by the
    /// horizon).
    pub tau: Vec<Option<f64>>,
    pub n: u64,
    /// `r'` at `σ_N`.
    pub final_position: i64,
    /// `σ_N` lies in the verification margin, so `τ_{N+1} = ∞` was only
    /// checked on a short stretch.
    pub censored: bool,
    pub horizon: f64,
    pub window_suspect: bool,
}

/// The origin process restarted from `{0}` at each extinction; its sup is
/// the piecewise endpoint `r'`.
struct Chain<'a> {
    log: &'a EventLog,
    proc: Process<'a>,
    horizon: f64,
    extinctions: Vec<f64>,
    touched: bool,
}

impl<'a> Chain<'a> {
    fn new(log: &'a EventLog, horizon: f64) -> Result<Self> {
        Ok(Chain {
            log,
            proc: Process::new(log.view(EdgeMask::FullGraph), [0], 0.0, horizon)?.track_boundary(-log.range()),
            horizon,
            extinctions: Vec::new(),
            touched: false,
        })
    }

    /// `r'_t`, after applying every event up to `t`.
    fn sup_at(&mut self, t: f64) -> Result<i64> {
        while self.proc.peek().is_some_and(|k| k.time() <= t) {
            self.proc.step();
            self.touched |= self.proc.contaminated_at().is_some();
            if self.proc.is_empty() {
                let at = self.proc.now();
                self.extinctions.push(at);
                self.proc = Process::new(self.log.view(EdgeMask::FullGraph), [0], at, self.horizon)?
                    .track_boundary(-self.log.range());
            }
        }
        Ok(self.proc.sup().expect("the chain restarts on extinction"))
    }
}

pub fn restart_construction(log: &EventLog, horizon: f64) -> Result<RestartRecord> {
    restart_construction_with(log, horizon, &PsiOptions::default())
}

pub fn restart_construction_with(log: &EventLog, horizon: f64, opts: &PsiOptions) -> Result<RestartRecord> {
    if horizon > log.horizon() {
        return Err(Error::Range {
            requested: horizon,
            available: log.horizon(),
        });
    }
    if horizon < 1.0 {
        return Err(Error::invalid("horizon", "the restart chain needs a horizon of at least 1"));
    }
    if !log.config().contains(0) {
        return Err(Error::Usage("window must contain the origin".into()));
    }
    let evaluator: Evaluator = opts.evaluator;
    let mut chain = Chain::new(log, horizon)?;
    let mut sigma = vec![1.0];
    let mut tau = vec![Some(1.0)];
    let mut suspect = false;
    loop {
        let s = *sigma.last().expect("nonempty");
        let x = chain.sup_at(s)?;
        let out = evaluator.evaluate(log, x, s, horizon)?;
        suspect |= out.edge_touched;
        match out.violation {
            Some(v) => {
                tau.push(Some(v - s));
                sigma.push(v);
            }
            None => {
                tau.push(None);
                return Ok(RestartRecord {
                    extinction_times: chain.extinctions,
                    n: sigma.len() as u64,
                    sigma,
                    tau,
                    final_position: x,
                    censored: s > horizon - opts.margin_for(horizon),
                    horizon,
                    window_suspect: suspect || chain.touched,
                });
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::SimConfig;

    #[test]
    fn empty_log() {
        let cfg = SimConfig::new(1.0, 1, 5.0, 0).with_window(-4, 4);
        let log = EventLog::from_events(cfg, &[], &[]).unwrap();
        let r = restart_construction(&log, 5.0).unwrap();
        assert_eq!((r.n, r.final_position, r.sigma.clone()), (1, 0, vec![1.0]));
        assert!(r.extinction_times.is_empty());
        assert_eq!(r.tau, vec![Some(1.0), None]);
    }

    #[test]
    fn origin_dies_then_restarts() {
        let cfg = SimConfig::new(1.0, 1, 5.0, 0).with_window(-4, 4);
        let log = EventLog::from_events(cfg, &[(0, 0.5)], &[(0, 1, 2.0)]).unwrap();
        let r = restart_construction(&log, 5.0).unwrap();
        assert_eq!(r.extinction_times, vec![0.5]);
        // Restarted at {0} at 0.5, nothing else happens before 1.
        assert_eq!(r.final_position, 0);
    }
}
