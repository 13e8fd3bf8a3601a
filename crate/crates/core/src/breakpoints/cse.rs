use crate::contact::{lockstep, Cut, Process};
use crate::error::{Error, Result};
use crate::graph::{EdgeMask, EventLog};

fn check_point(log: &EventLog, x: i64, s: f64, horizon: f64) -> Result<()> {
    if !(s <= horizon) {
        return Err(Error::Usage(format!("time {s} is after the horizon {horizon}")));
    }
    if !log.config().contains(x) {
        return Err(Error::Usage(format!("site {x} outside the window")));
    }
    Ok(())
}

/// First time in `(s, horizon]` at which the sup from `{y <= x}` differs
/// from the sup from `{x}`, both started at time `s` on the full graph.
/// Reference implementation: runs both processes on the whole window.
pub fn cse_violation_naive(log: &EventLog, x: i64, s: f64, horizon: f64) -> Result<Option<f64>> {
    check_point(log, x, s, horizon)?;
    let view = log.view(EdgeMask::FullGraph);
    let mut single = Process::new(view, [x], s, horizon)?;
    let mut half = Process::new(view, log.x_min()..=x, s, horizon)?;
    while let Some(key) = lockstep(&mut [&mut single, &mut half]) {
        if single.sup() != half.sup() {
            return Ok(Some(key.time()));
        }
    }
    Ok(None)
}

/// Whether `x × s` controls subsequent edges up to `horizon` (reference
/// implementation).
pub fn is_cse(log: &EventLog, x: i64, s: f64, horizon: f64) -> Result<bool> {
    Ok(cse_violation_naive(log, x, s, horizon)?.is_none())
}

enum Attempt {
    Decided(CseOutcome),
    Ambiguous,
}

/// Result of a band evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CseOutcome {
    /// First time the two sups differ, `None` if they agree up to the
    /// horizon.
    pub violation: Option<f64>,
    /// The band reached within `M` of a window edge. When false the answer
    /// is also the one for the infinite lattice; when true it is the
    /// answer for the window.
    pub edge_touched: bool,
}

/// Exact c.s.e. evaluation that only simulates a band below the right
/// edge.
///
/// Both starts are bracketed: a copy with the sites below the band removed
/// (lower bound) and a copy with a permanently occupied wall below the
/// band (upper bound on the sup). When the upper bound of the half-line
/// sup meets the lower bound of the single sup the two agree; when the
/// lower bound of the half-line sup exceeds the upper bound of the single
/// sup they differ. Anything else restarts with a doubled band. A band
/// reaching below the window makes the brackets exact, so the answer
/// always equals [`cse_violation_naive`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BandEvaluator {
    pub initial_width: i64,
}

impl Default for BandEvaluator {
    fn default() -> Self {
        BandEvaluator { initial_width: 24 }
    }
}

impl BandEvaluator {
    pub fn evaluate(&self, log: &EventLog, x: i64, s: f64, horizon: f64) -> Result<CseOutcome> {
        check_point(log, x, s, horizon)?;
        let mut w = self.initial_width.max(2 * log.range());
        loop {
            if let Attempt::Decided(out) = self.attempt(log, x, s, horizon, w)? {
                return Ok(out);
            }
            w *= 2;
        }
    }

    pub fn violation(&self, log: &EventLog, x: i64, s: f64, horizon: f64) -> Result<Option<f64>> {
        Ok(self.evaluate(log, x, s, horizon)?.violation)
    }

    pub fn is_cse(&self, log: &EventLog, x: i64, s: f64, horizon: f64) -> Result<bool> {
        Ok(self.violation(log, x, s, horizon)?.is_none())
    }

    fn attempt(&self, log: &EventLog, x: i64, s: f64, horizon: f64, w: i64) -> Result<Attempt> {
        let view = log.view(EdgeMask::FullGraph);
        let b = x - w;
        let band = b.max(log.x_min())..=x;
        let mut lo = Process::new(view, band.clone(), s, horizon)?.with_cut(Cut::Empty(b));
        let mut hi = Process::new(view, band, s, horizon)?.with_cut(Cut::Wall(b));
        let mut s_lo = Process::new(view, [x], s, horizon)?.with_cut(Cut::Empty(b));
        let mut s_hi = Process::new(view, [x], s, horizon)?.with_cut(Cut::Wall(b));
        let mut cut = b;
        let m = log.range();
        let right_guard = Some(log.x_max() - m);
        let mut touched = b - m < log.x_min() || hi.upper_sup() > right_guard;
        while let Some(key) = lockstep(&mut [&mut lo, &mut hi, &mut s_lo, &mut s_hi]) {
            touched |= hi.upper_sup() > right_guard;
            if hi.upper_sup() <= s_lo.sup() {
                // Follow the edge so the band stays narrow.
                if let Some(top) = lo.sup() {
                    if top - w >= cut + w / 2 {
                        cut = top - w;
                        for p in [&mut lo, &mut hi, &mut s_lo, &mut s_hi] {
                            p.raise_cut(cut);
                        }
                    }
                }
                continue;
            }
            if lo.sup() > s_hi.upper_sup() {
                return Ok(Attempt::Decided(CseOutcome {
                    violation: Some(key.time()),
                    edge_touched: touched,
                }));
            }
            return Ok(Attempt::Ambiguous);
        }
        Ok(Attempt::Decided(CseOutcome {
            violation: None,
            edge_touched: touched,
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_event_log, SimConfig};

    #[test]
    fn no_events_means_cse() {
        let cfg = SimConfig::new(1.0, 2, 3.0, 0).with_window(-8, 8);
        let log = EventLog::from_events(cfg, &[], &[]).unwrap();
        assert!(is_cse(&log, 1, 0.5, 3.0).unwrap());
        assert!(BandEvaluator::default().is_cse(&log, 1, 0.5, 3.0).unwrap());
    }

    #[test]
    fn hand_trace_violation() {
        // Single start dies at s + 0.2; the half-line start reaches x + 1.
        let cfg = SimConfig::new(1.0, 2, 3.0, 0).with_window(-8, 8);
        let log = EventLog::from_events(cfg, &[(2, 1.2)], &[(1, 3, 1.3)]).unwrap();
        assert_eq!(cse_violation_naive(&log, 2, 1.0, 3.0).unwrap(), Some(1.2));
        assert_eq!(BandEvaluator::default().violation(&log, 2, 1.0, 3.0).unwrap(), Some(1.2));
    }

    #[test]
    fn band_matches_naive_on_random_points() {
        for seed in 0..6 {
            let cfg = SimConfig::new(3.0, 1 + (seed % 2) as u32, 12.0, seed).with_window(-120, 120);
            let log = build_event_log(cfg).unwrap();
            let narrow = BandEvaluator { initial_width: 2 };
            for (i, x) in [-3i64, 0, 4].into_iter().enumerate() {
                let s = 0.5 + i as f64;
                let want = cse_violation_naive(&log, x, s, 12.0).unwrap();
                assert_eq!(narrow.violation(&log, x, s, 12.0).unwrap(), want, "seed {seed} x {x}");
                assert_eq!(BandEvaluator::default().violation(&log, x, s, 12.0).unwrap(), want);
            }
        }
    }
}
