use std::collections::BTreeSet;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::engine::{Process, Transition, TransitionKind};
use crate::error::{Error, Result};
use crate::graph::{EdgeMask, EventLog, LogView};

/// A finite set of occupied sites.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Configuration(BTreeSet<i64>);

impl Configuration {
    pub fn new(sites: impl IntoIterator<Item = i64>) -> Self {
        Configuration(sites.into_iter().collect())
    }

    pub fn single(x: i64) -> Self {
        Self::new([x])
    }

    pub fn interval(a: i64, b: i64) -> Self {
        Self::new(a..=b)
    }

    /// Every window site at or left of `x`: the truncated half-line start.
    pub fn half_line(log: &EventLog, x: i64) -> Self {
        Self::interval(log.x_min(), x)
    }

    pub fn contains(&self, x: i64) -> bool {
        self.0.contains(&x)
    }

    pub fn iter(&self) -> impl Iterator<Item = i64> + '_ {
        self.0.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn min(&self) -> Option<i64> {
        self.0.first().copied()
    }

    pub fn max(&self) -> Option<i64> {
        self.0.last().copied()
    }

    pub(crate) fn insert(&mut self, x: i64) -> bool {
        self.0.insert(x)
    }

    pub(crate) fn remove(&mut self, x: i64) -> bool {
        self.0.remove(&x)
    }

    pub fn as_set(&self) -> &BTreeSet<i64> {
        &self.0
    }
}

impl FromIterator<i64> for Configuration {
    fn from_iter<I: IntoIterator<Item = i64>>(iter: I) -> Self {
        Self::new(iter)
    }
}

/// Initial state plus every state change up to the horizon.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub initial: Configuration,
    pub transitions: Vec<Transition>,
    pub start: f64,
    pub horizon: f64,
    pub mask: EdgeMask,
    /// Time at which the window boundary may first have influenced the
    /// recorded states. `None` means the trajectory equals the one on the
    /// infinite graph.
    pub contaminated_at: Option<f64>,
    pub extinct_at: Option<f64>,
}

impl Trajectory {
    pub fn boundary_contaminated(&self) -> bool {
        self.contaminated_at.is_some()
    }

    pub fn survived(&self) -> bool {
        self.extinct_at.is_none()
    }

    /// State at time `t` (right-continuous).
    pub fn state_at(&self, t: f64) -> Result<Configuration> {
        if t < self.start || t > self.horizon {
            return Err(Error::Range {
                requested: t,
                available: self.horizon,
            });
        }
        let mut state = self.initial.clone();
        for tr in self.transitions.iter().take_while(|tr| tr.time <= t) {
            apply(&mut state, tr);
        }
        Ok(state)
    }

    /// Walks the piecewise-constant path: yields `(time, state)` at the
    /// start and after every transition.
    pub fn replay(&self) -> impl Iterator<Item = (f64, Configuration)> + '_ {
        let mut state = self.initial.clone();
        std::iter::once((self.start, state.clone())).chain(self.transitions.iter().map(
            move |tr| {
                apply(&mut state, tr);
                (tr.time, state.clone())
            },
        ))
    }

    /// Right endpoint after each change, starting with the initial one.
    /// `None` is the empty-set sentinel.
    pub fn sup_series(&self) -> Vec<(f64, Option<i64>)> {
        self.edge_series(|s| s.max())
    }

    pub fn inf_series(&self) -> Vec<(f64, Option<i64>)> {
        self.edge_series(|s| s.min())
    }

    fn edge_series(&self, f: impl Fn(&Configuration) -> Option<i64>) -> Vec<(f64, Option<i64>)> {
        let mut state = self.initial.clone();
        let mut out = vec![(self.start, f(&state))];
        for tr in &self.transitions {
            apply(&mut state, tr);
            let v = f(&state);
            if out.last().map(|l| l.1) != Some(v) {
                out.push((tr.time, v));
            }
        }
        out
    }

    /// Writes `time,site,event` rows after a commented header holding the
    /// horizon, mask and initial state.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# start={} horizon={} mask={}", self.start, self.horizon, self.mask.name())?;
        let init: Vec<String> = self.initial.iter().map(|x| x.to_string()).collect();
        writeln!(w, "# initial={}", init.join(" "))?;
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(["time", "site", "event"])?;
        for tr in &self.transitions {
            let kind = match tr.kind {
                TransitionKind::Born => "born",
                TransitionKind::Died => "died",
            };
            csv.write_record([tr.time.to_string(), tr.site.to_string(), kind.to_string()])?;
        }
        csv.flush()?;
        Ok(())
    }
}

pub(crate) fn apply(state: &mut Configuration, tr: &Transition) {
    match tr.kind {
        TransitionKind::Born => state.insert(tr.site),
        TransitionKind::Died => state.remove(tr.site),
    };
}

/// Left edge floor for contamination checks of half-line starts: the part
/// of the state that matters is everything at or right of `-M`.
pub(crate) fn floor_for(log: &EventLog) -> i64 {
    -log.range()
}

fn record(proc: &mut Process<'_>, transitions: &mut Vec<Transition>) {
    while let Some(out) = proc.step() {
        if let Some(c) = out.change {
            transitions.push(c);
        }
    }
}

/// Evolves `initial` from `start` to `horizon` on the masked log.
pub fn evolve_from(
    view: LogView<'_>,
    initial: &Configuration,
    start: f64,
    horizon: f64,
) -> Result<Trajectory> {
    let mut proc = Process::new(view, initial.iter(), start, horizon)?
        .track_boundary(floor_for(view.log));
    let mut transitions = Vec::new();
    record(&mut proc, &mut transitions);
    proc.settle(horizon);
    Ok(Trajectory {
        initial: initial.clone(),
        transitions,
        start,
        horizon,
        mask: view.mask,
        contaminated_at: proc.contaminated_at(),
        extinct_at: proc.extinct_at(),
    })
}

pub fn evolve(view: LogView<'_>, initial: &Configuration, horizon: f64) -> Result<Trajectory> {
    evolve_from(view, initial, 0.0, horizon)
}

/// Evolves several initial states together on one log (the basic coupling).
pub fn evolve_family(
    view: LogView<'_>,
    initials: &[Configuration],
    horizon: f64,
) -> Result<Vec<Trajectory>> {
    let mut procs = initials
        .iter()
        .map(|c| Ok(Process::new(view, c.iter(), 0.0, horizon)?.track_boundary(floor_for(view.log))))
        .collect::<Result<Vec<_>>>()?;
    let mut recorded: Vec<Vec<Transition>> = vec![Vec::new(); procs.len()];
    loop {
        let Some(key) = procs.iter_mut().filter_map(|p| p.peek()).min() else { break };
        for (p, rec) in procs.iter_mut().zip(recorded.iter_mut()) {
            if p.peek() == Some(key) {
                if let Some(c) = p.step().and_then(|o| o.change) {
                    rec.push(c);
                }
            }
        }
    }
    Ok(procs
        .into_iter()
        .zip(recorded)
        .zip(initials)
        .map(|((mut p, transitions), initial)| {
            p.settle(horizon);
            Trajectory {
                initial: initial.clone(),
                transitions,
                start: 0.0,
                horizon,
                mask: view.mask,
                contaminated_at: p.contaminated_at(),
                extinct_at: p.extinct_at(),
            }
        })
        .collect())
}
