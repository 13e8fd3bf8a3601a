use std::collections::BTreeSet;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::engine::{lockstep, Process, TransitionKind};
use super::trajectory::{floor_for, Configuration, Trajectory};
use crate::error::{Error, Result};
use crate::graph::{EdgeMask, EventLog};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub agrees: bool,
    pub first_violation_time: Option<f64>,
    pub checked_horizon: f64,
}

impl AgreementReport {
    pub(crate) fn from_violation(first_violation_time: Option<f64>, checked_horizon: f64) -> Self {
        AgreementReport {
            agrees: first_violation_time.is_none(),
            first_violation_time,
            checked_horizon,
        }
    }

    /// Whether the event held on `[0, t]` for some `t` up to the checked
    /// horizon.
    pub fn holds_until(&self, t: f64) -> bool {
        self.first_violation_time.is_none_or(|v| v > t)
    }
}

/// Visits the merged transitions of several trajectories one time at a
/// time. `visit` receives the time and the index/transition pairs at it.
fn joint_walk(trajs: &[&Trajectory], mut visit: impl FnMut(f64, &[(usize, crate::contact::Transition)]) -> bool) {
    let mut cursors = vec![0usize; trajs.len()];
    let mut batch = Vec::new();
    loop {
        let next = trajs
            .iter()
            .zip(&cursors)
            .filter_map(|(t, &c)| t.transitions.get(c).map(|tr| tr.time))
            .min_by(f64::total_cmp);
        let Some(time) = next else { break };
        batch.clear();
        for (i, t) in trajs.iter().enumerate() {
            while let Some(tr) = t.transitions.get(cursors[i]) {
                if tr.time != time {
                    break;
                }
                batch.push((i, *tr));
                cursors[i] += 1;
            }
        }
        if !visit(time, &batch) {
            break;
        }
    }
}

/// Checks `traj_full ∩ F = traj_f ∩ F` at every time of `[from_time, horizon]`.
pub fn agreement_on_set(
    traj_full: &Trajectory,
    traj_f: &Trajectory,
    f: &Configuration,
    from_time: f64,
) -> Result<AgreementReport> {
    if traj_full.horizon != traj_f.horizon || traj_full.start != traj_f.start {
        return Err(Error::Usage(format!(
            "trajectories cover different intervals: [{}, {}] vs [{}, {}]",
            traj_full.start, traj_full.horizon, traj_f.start, traj_f.horizon
        )));
    }
    let mut a: BTreeSet<i64> = traj_full.initial.iter().filter(|&x| f.contains(x)).collect();
    let mut b: BTreeSet<i64> = traj_f.initial.iter().filter(|&x| f.contains(x)).collect();
    let from = from_time.max(traj_full.start);
    let mut violation = None;
    let mut checking = false;
    joint_walk(&[traj_full, traj_f], |time, batch| {
        if !checking && time > from {
            checking = true;
            if a != b {
                violation = Some(from);
                return false;
            }
        }
        for (i, tr) in batch {
            if f.contains(tr.site) {
                let set = if *i == 0 { &mut a } else { &mut b };
                match tr.kind {
                    TransitionKind::Born => set.insert(tr.site),
                    TransitionKind::Died => set.remove(&tr.site),
                };
            }
        }
        if checking && a != b {
            violation = Some(time);
            return false;
        }
        true
    });
    if !checking && from <= traj_full.horizon && a != b {
        violation = Some(from);
    }
    Ok(AgreementReport::from_violation(violation, traj_full.horizon))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EndpointSample {
    pub time: f64,
    pub r: Option<i64>,
    #[serde(rename = "R")]
    pub big_r: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndpointReport {
    pub agreement: AgreementReport,
    pub series: Vec<EndpointSample>,
    pub contaminated_at: Option<f64>,
}

impl EndpointReport {
    /// Writes `time,r,R`; an extinct endpoint is written as `-inf`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(["time", "r", "R"])?;
        let fmt = |v: Option<i64>| v.map_or_else(|| "-inf".to_string(), |x| x.to_string());
        for s in &self.series {
            csv.write_record([s.time.to_string(), fmt(s.r), fmt(s.big_r)])?;
        }
        csv.flush()?;
        Ok(())
    }
}

/// Runs `{0}` on the full graph and `[x_min, 0]` on `half_mask` together and
/// checks `r_t = R_t` on `[0, horizon]`. An extinct single start never
/// equals a live half-line start. With `stop_early` the run ends at the
/// first violation.
pub fn endpoint_equality_with(
    log: &EventLog,
    half_mask: EdgeMask,
    horizon: f64,
    stop_early: bool,
) -> Result<EndpointReport> {
    if !log.config().contains(0) {
        return Err(Error::Usage("window must contain the origin".into()));
    }
    let mut single = Process::new(log.view(EdgeMask::FullGraph), [0], 0.0, horizon)?;
    let mut half = Process::new(log.view(half_mask), log.x_min()..=0, 0.0, horizon)?
        .track_boundary(floor_for(log));
    let mut series = vec![EndpointSample {
        time: 0.0,
        r: single.sup(),
        big_r: half.sup(),
    }];
    let mut violation = None;
    while let Some(key) = lockstep(&mut [&mut single, &mut half]) {
        let (r, big_r) = (single.sup(), half.sup());
        let last = series.last().expect("series starts nonempty");
        if (last.r, last.big_r) != (r, big_r) {
            series.push(EndpointSample { time: key.time(), r, big_r });
        }
        if violation.is_none() && r != big_r {
            violation = Some(key.time());
            if stop_early {
                break;
            }
        }
    }
    if violation.is_none() {
        half.settle(horizon);
    }
    Ok(EndpointReport {
        agreement: AgreementReport::from_violation(violation, horizon),
        series,
        contaminated_at: half.contaminated_at(),
    })
}

pub fn endpoint_equality(log: &EventLog, half_mask: EdgeMask, horizon: f64) -> Result<EndpointReport> {
    endpoint_equality_with(log, half_mask, horizon, false)
}

/// The event that, on `(0, t1]`, site 0 stays occupied from `{0}`, the
/// half-line start never pushes its sup above 0, and at `t1` the `{0}`
/// start holds all of `[-M, 0]`.
pub fn bootstrap_event(log: &EventLog, horizon_one: f64) -> Result<bool> {
    if log.horizon() < horizon_one {
        return Err(Error::Range {
            requested: horizon_one,
            available: log.horizon(),
        });
    }
    let m = log.range();
    if log.x_min() > -m || !log.config().contains(0) {
        return Err(Error::Usage(format!("window must contain [{}, 0]", -m)));
    }
    let view = log.view(EdgeMask::FullGraph);
    let mut single = Process::new(view, [0], 0.0, horizon_one)?;
    let mut half = Process::new(view, log.x_min()..=0, 0.0, horizon_one)?;
    while lockstep(&mut [&mut single, &mut half]).is_some() {
        if !single.is_occupied(0) || half.sup() > Some(0) {
            return Ok(false);
        }
    }
    Ok((-m..=0).all(|x| single.is_occupied(x)))
}

/// Checks, for every `t` in `[t0, horizon]`, that the two trajectories
/// agree on every `y ∈ [-a t, 0]` with `y ≥ min_{s ≤ t} l_s`, where `l`
/// is the left endpoint of `traj_f`.
pub fn shape_agreement(traj_full: &Trajectory, traj_f: &Trajectory, a: f64, t0: f64) -> Result<bool> {
    if !(a > 0.0) {
        return Err(Error::invalid("speed_a", "must be positive"));
    }
    if traj_full.horizon != traj_f.horizon || traj_full.start != traj_f.start {
        return Err(Error::Usage("trajectories cover different intervals".into()));
    }
    let horizon = traj_full.horizon;
    let mut full: BTreeSet<i64> = traj_full.initial.iter().collect();
    let mut fset: BTreeSet<i64> = traj_f.initial.iter().collect();
    let mut diff: BTreeSet<i64> = full.symmetric_difference(&fset).copied().collect();
    let Some(mut min_l) = fset.first().copied() else {
        return Ok(true);
    };
    // The state found at `since` holds until the next transition time;
    // the constraint region only grows, so checking each interval at its
    // right end covers it.
    let check = |diff: &BTreeSet<i64>, min_l: i64, until: f64| -> bool {
        let lower = min_l.max((-a * until).ceil() as i64);
        lower > 0 || diff.range(lower..=0).next().is_none()
    };
    let mut ok = true;
    let mut since = traj_full.start;
    joint_walk(&[traj_full, traj_f], |time, batch| {
        if time > t0 && !check(&diff, min_l, time.min(horizon)) {
            ok = false;
            return false;
        }
        for (i, tr) in batch {
            let set = if *i == 0 { &mut full } else { &mut fset };
            match tr.kind {
                TransitionKind::Born => set.insert(tr.site),
                TransitionKind::Died => set.remove(&tr.site),
            };
            if full.contains(&tr.site) != fset.contains(&tr.site) {
                diff.insert(tr.site);
            } else {
                diff.remove(&tr.site);
            }
        }
        if let Some(&l) = fset.first() {
            min_l = min_l.min(l);
        }
        since = time;
        true
    });
    if ok && since.max(t0) <= horizon {
        ok = check(&diff, min_l, horizon);
    }
    Ok(ok)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contact::evolve;
    use crate::graph::SimConfig;

    fn log_with(m: u32, deaths: &[(i64, f64)], arrows: &[(i64, i64, f64)]) -> EventLog {
        let cfg = SimConfig::new(1.0, m, 1.0, 0).with_window(-6, 6);
        EventLog::from_events(cfg, deaths, arrows).unwrap()
    }

    #[test]
    fn agreement_examples() {
        let f = Configuration::new([0, -1]);
        for (deaths, arrows, f, expect) in [
            (vec![], vec![], f.clone(), None),
            (vec![(0, 0.2)], vec![], f.clone(), None),
            (vec![(0, 0.2)], vec![(-1, 0, 0.4)], Configuration::single(0), Some(0.4)),
        ] {
            let log = log_with(1, &deaths, &arrows);
            let view = log.view(EdgeMask::FullGraph);
            let full = evolve(view, &Configuration::half_line(&log, 0), 1.0).unwrap();
            let tf = evolve(view, &f, 1.0).unwrap();
            let rep = agreement_on_set(&full, &tf, &f, 0.0).unwrap();
            assert_eq!(rep.first_violation_time, expect);
            assert_eq!(rep.agrees, expect.is_none());
        }
    }

    #[test]
    fn agreement_from_later_time() {
        // Sites differ on [0.4, 0.6) only; checking from 0.7 sees agreement.
        let log = log_with(1, &[(0, 0.2), (0, 0.6)], &[(-1, 0, 0.4)]);
        let view = log.view(EdgeMask::FullGraph);
        let full = evolve(view, &Configuration::half_line(&log, 0), 1.0).unwrap();
        let tf = evolve(view, &Configuration::single(0), 1.0).unwrap();
        let f = Configuration::single(0);
        assert!(agreement_on_set(&full, &tf, &f, 0.7).unwrap().agrees);
        assert_eq!(agreement_on_set(&full, &tf, &f, 0.5).unwrap().first_violation_time, Some(0.5));
    }

    #[test]
    fn endpoint_examples() {
        let log = log_with(1, &[], &[]);
        let rep = endpoint_equality(&log, EdgeMask::FullGraph, 1.0).unwrap();
        assert!(rep.agreement.agrees);
        assert_eq!(rep.series, vec![EndpointSample { time: 0.0, r: Some(0), big_r: Some(0) }]);

        let log = log_with(2, &[(0, 0.2)], &[(-1, 1, 0.3)]);
        let rep = endpoint_equality(&log, EdgeMask::FullGraph, 1.0).unwrap();
        // Extinction of the single start at 0.2 is already a violation.
        assert_eq!(rep.agreement.first_violation_time, Some(0.2));
        assert_eq!(rep.series.last().unwrap().big_r, Some(1));
    }

    #[test]
    fn bootstrap_examples() {
        assert!(!bootstrap_event(&log_with(1, &[], &[]), 1.0).unwrap());
        assert!(bootstrap_event(&log_with(1, &[], &[(0, -1, 0.5)]), 1.0).unwrap());
        assert!(!bootstrap_event(&log_with(1, &[(0, 0.3)], &[(0, -1, 0.2)]), 1.0).unwrap());
        // Half-line start pushes past 0.
        assert!(!bootstrap_event(&log_with(1, &[], &[(0, -1, 0.5), (0, 1, 0.6)]), 1.0).unwrap());
    }

    #[test]
    fn shape_on_empty_log() {
        let log = log_with(1, &[], &[]);
        let view = log.view(EdgeMask::HalfLine);
        let full = evolve(view, &Configuration::half_line(&log, 0), 1.0).unwrap();
        let tf = evolve(view, &Configuration::single(0), 1.0).unwrap();
        assert!(shape_agreement(&full, &tf, 0.5, 0.0).unwrap());
    }

    #[test]
    fn shape_detects_disagreement_inside_cone() {
        // The full start refills -1 at 0.6 from -2; the {0} start cannot.
        let log = log_with(1, &[(-1, 0.4)], &[(0, -1, 0.3), (-2, -1, 0.6)]);
        let view = log.view(EdgeMask::HalfLine);
        let full = evolve(view, &Configuration::half_line(&log, 0), 1.0).unwrap();
        let tf = evolve(view, &Configuration::single(0), 1.0).unwrap();
        assert!(!shape_agreement(&full, &tf, 10.0, 0.0).unwrap());
        assert!(!shape_agreement(&full, &tf, 10.0, 0.7).unwrap());
        // With a slow cone the region [-a t, 0] never reaches -1.
        assert!(shape_agreement(&full, &tf, 0.5, 0.0).unwrap());
    }
}
