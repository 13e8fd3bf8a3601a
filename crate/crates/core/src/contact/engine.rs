use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::graph::{EdgeMask, EventLog, LogView};

/// Position of an event in the global total order
/// `(time, death < arrow, source, target)`. Two processes on one log see
/// the same event iff their keys are equal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EventKey {
    time_bits: u64,
    kind: u8,
    source: i64,
    target: i64,
}

impl EventKey {
    pub fn time(&self) -> f64 {
        f64::from_bits(self.time_bits)
    }

    pub fn source(&self) -> i64 {
        self.source
    }

    pub fn target(&self) -> i64 {
        self.target
    }

    pub fn is_death(&self) -> bool {
        self.kind == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Pending {
    key: EventKey,
    idx: u32,
    epoch: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransitionKind {
    Born,
    Died,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub time: f64,
    pub site: i64,
    pub kind: TransitionKind,
}

/// Lower truncation of a process, used to bracket a half-line process by
/// two processes living on a band near its right edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cut {
    None,
    /// Sites below the cut are vacant and stay vacant: a lower bound.
    Empty(i64),
    /// Sites below the cut (inside the window) count as permanently
    /// occupied: an upper bound.
    Wall(i64),
}

#[derive(Debug, Clone)]
struct Tracker {
    left_seeded: bool,
    right_seeded: bool,
    floor: i64,
    left_ptr: usize,
    right_ptr: usize,
    left_front: i64,
    right_front: i64,
}

/// One contact process evolving on a shared log.
///
/// Only occupied sites (and wall sites) have their timelines in the heap,
/// so the cost is proportional to the events the process can feel. Events
/// are applied in the log's global order; state changes happen only at
/// event times.
#[derive(Debug, Clone)]
pub struct Process<'a> {
    log: &'a EventLog,
    mask: EdgeMask,
    range: i64,
    x_min: i64,
    x_max: i64,
    occ: Vec<bool>,
    epoch: Vec<u32>,
    heap: BinaryHeap<Reverse<Pending>>,
    count: usize,
    sup: i64,
    inf: i64,
    now: f64,
    horizon: f64,
    cut: Cut,
    births: u64,
    extinct_at: Option<f64>,
    tracker: Option<Tracker>,
    contaminated_at: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub key: EventKey,
    pub change: Option<Transition>,
}

impl<'a> Process<'a> {
    /// Starts the process from `initial` at time `start`; events strictly
    /// after `start` and no later than `horizon` are applied.
    pub fn new(
        view: LogView<'a>,
        initial: impl IntoIterator<Item = i64>,
        start: f64,
        horizon: f64,
    ) -> Result<Self> {
        let log = view.log;
        if horizon > log.horizon() {
            return Err(Error::Range {
                requested: horizon,
                available: log.horizon(),
            });
        }
        if !(start >= 0.0 && start <= horizon) {
            return Err(Error::Usage(format!(
                "start time {start} outside [0, {horizon}]"
            )));
        }
        let width = log.config().width();
        let mut p = Process {
            log,
            mask: view.mask,
            range: log.range(),
            x_min: log.x_min(),
            x_max: log.x_max(),
            occ: vec![false; width],
            epoch: vec![0; width],
            heap: BinaryHeap::new(),
            count: 0,
            sup: i64::MIN,
            inf: i64::MAX,
            now: start,
            horizon,
            cut: Cut::None,
            births: 0,
            extinct_at: None,
            tracker: None,
            contaminated_at: None,
        };
        for x in initial {
            if x < p.x_min || x > p.x_max {
                return Err(Error::Usage(format!(
                    "initial site {x} outside the window [{}, {}]",
                    p.x_min, p.x_max
                )));
            }
            let i = log.index(x);
            if !p.occ[i] {
                p.occ[i] = true;
                p.count += 1;
                p.sup = p.sup.max(x);
                p.inf = p.inf.min(x);
                p.schedule(x);
            }
        }
        if p.count == 0 {
            p.extinct_at = Some(start);
        }
        Ok(p)
    }

    /// Enables boundary-contamination tracking. An edge the initial set
    /// touches is treated as a truncated infinite start: it contaminates
    /// once its influence front reaches the sup (or `floor`, whichever is
    /// lower). An untouched edge contaminates once a particle comes within
    /// `M` of it.
    pub fn track_boundary(mut self, floor: i64) -> Self {
        let left_seeded = self.count > 0 && self.occ[0];
        let right_seeded = self.count > 0 && self.occ[self.occ.len() - 1];
        let mut tr = Tracker {
            left_seeded,
            right_seeded,
            floor,
            left_ptr: 0,
            right_ptr: 0,
            left_front: self.log.left_front().initial(),
            right_front: self.log.right_front().initial(),
        };
        if !left_seeded {
            tr.left_front = i64::MIN;
        }
        if !right_seeded {
            tr.right_front = i64::MAX;
        }
        self.tracker = Some(tr);
        if self.count > 0 && (!left_seeded && self.inf < self.x_min + self.range
            || !right_seeded && self.sup > self.x_max - self.range)
        {
            self.contaminated_at = Some(self.now);
        }
        self.advance_fronts(self.now);
        self.check_fronts();
        self
    }

    pub fn with_cut(mut self, cut: Cut) -> Self {
        match cut {
            Cut::None => {}
            Cut::Empty(b) | Cut::Wall(b) => {
                self.cut = match cut {
                    Cut::Empty(_) => Cut::Empty(i64::MIN),
                    _ => Cut::Wall(i64::MIN),
                };
                self.raise_cut(b);
            }
        }
        self
    }

    fn cut_level(&self) -> Option<i64> {
        match self.cut {
            Cut::None => None,
            Cut::Empty(b) | Cut::Wall(b) => Some(b),
        }
    }

    /// Moves the cut up to `b`. Occupied sites below it are dropped (empty
    /// cut) or absorbed into the wall.
    pub fn raise_cut(&mut self, b: i64) {
        let old = match self.cut_level() {
            Some(old) if b > old => old,
            _ => return,
        };
        let lo = old.max(self.x_min);
        let hi = (b - 1).min(self.x_max);
        if self.count > 0 && self.inf < b {
            for x in self.inf.max(lo)..=hi {
                let i = self.log.index(x);
                if self.occ[i] {
                    self.occ[i] = false;
                    self.epoch[i] = self.epoch[i].wrapping_add(1);
                    self.count -= 1;
                }
            }
            if self.count == 0 {
                self.sup = i64::MIN;
                self.inf = i64::MAX;
            } else {
                let mut x = b.max(self.x_min);
                while !self.occ[self.log.index(x)] {
                    x += 1;
                }
                self.inf = x;
            }
        }
        if let Cut::Wall(_) = self.cut {
            // Retire the old wall, then schedule the new one.
            let old_lo = (old.saturating_sub(self.range)).max(self.x_min);
            for x in old_lo..=old.saturating_sub(1).min(self.x_max) {
                let i = self.log.index(x);
                self.epoch[i] = self.epoch[i].wrapping_add(1);
            }
            self.cut = Cut::Wall(b);
            for x in (b - self.range).max(self.x_min)..=hi {
                let i = self.log.index(x);
                self.epoch[i] = self.epoch[i].wrapping_add(1);
                self.schedule(x);
            }
        } else {
            self.cut = Cut::Empty(b);
        }
    }

    fn schedule(&mut self, x: i64) {
        let (times, deltas) = self.log.timeline(x);
        let now = self.now;
        let idx = times.partition_point(|&t| t <= now);
        self.push(x, idx, times, deltas);
    }

    #[inline]
    fn push(&mut self, x: i64, idx: usize, times: &[f64], deltas: &[i8]) {
        if idx < times.len() && times[idx] <= self.horizon {
            let d = deltas[idx];
            let key = EventKey {
                time_bits: times[idx].to_bits(),
                kind: (d != 0) as u8,
                source: x,
                target: x + d as i64,
            };
            let epoch = self.epoch[self.log.index(x)];
            self.heap.push(Reverse(Pending {
                key,
                idx: idx as u32,
                epoch,
            }));
        }
    }

    /// Key of the next event this process will apply, if any.
    pub fn peek(&mut self) -> Option<EventKey> {
        while let Some(Reverse(p)) = self.heap.peek() {
            if self.epoch[self.log.index(p.key.source)] == p.epoch {
                return Some(p.key);
            }
            self.heap.pop();
        }
        None
    }

    /// Applies the next event.
    pub fn step(&mut self) -> Option<StepOutcome> {
        self.peek()?;
        let Reverse(p) = self.heap.pop()?;
        let key = p.key;
        let t = key.time();
        if self.tracker.is_some() {
            self.advance_fronts(t);
            self.check_fronts();
        }
        self.now = t;
        let x = key.source;
        let (times, deltas) = self.log.timeline(x);
        let idx = p.idx as usize;
        let on_wall = matches!(self.cut, Cut::Wall(b) if x < b);
        let mut change = None;
        if key.kind == 0 {
            if on_wall {
                self.push(x, idx + 1, times, deltas);
            } else {
                let i = self.log.index(x);
                self.occ[i] = false;
                self.count -= 1;
                self.after_death(x);
                change = Some(Transition {
                    time: t,
                    site: x,
                    kind: TransitionKind::Died,
                });
            }
        } else {
            self.push(x, idx + 1, times, deltas);
            let y = key.target;
            let below_cut = self.cut_level().is_some_and(|b| y < b);
            if !below_cut && self.mask.allows(x, y) {
                let j = self.log.index(y);
                if !self.occ[j] {
                    self.occ[j] = true;
                    self.epoch[j] = self.epoch[j].wrapping_add(1);
                    self.count += 1;
                    self.births += 1;
                    self.sup = self.sup.max(y);
                    self.inf = self.inf.min(y);
                    self.schedule(y);
                    self.after_birth(y);
                    change = Some(Transition {
                        time: t,
                        site: y,
                        kind: TransitionKind::Born,
                    });
                }
            }
        }
        if self.tracker.is_some() {
            self.check_fronts();
        }
        Some(StepOutcome { key, change })
    }

    fn after_death(&mut self, x: i64) {
        if self.count == 0 {
            self.sup = i64::MIN;
            self.inf = i64::MAX;
            self.extinct_at = Some(self.now);
            return;
        }
        if x == self.sup {
            let mut y = x - 1;
            while !self.occ[self.log.index(y)] {
                y -= 1;
            }
            self.sup = y;
        }
        if x == self.inf {
            let mut y = x + 1;
            while !self.occ[self.log.index(y)] {
                y += 1;
            }
            self.inf = y;
        }
    }

    fn after_birth(&mut self, y: i64) {
        if self.contaminated_at.is_some() {
            return;
        }
        if let Some(tr) = &self.tracker {
            if (!tr.left_seeded && y < self.x_min + self.range)
                || (!tr.right_seeded && y > self.x_max - self.range)
            {
                self.contaminated_at = Some(self.now);
            }
        }
    }

    fn advance_fronts(&mut self, t: f64) {
        let log = self.log;
        if let Some(tr) = self.tracker.as_mut() {
            if tr.left_seeded {
                let ch = log.left_front().changes();
                while tr.left_ptr < ch.len() && ch[tr.left_ptr].0 <= t {
                    tr.left_front = ch[tr.left_ptr].1;
                    tr.left_ptr += 1;
                }
            }
            if tr.right_seeded {
                let ch = log.right_front().changes();
                while tr.right_ptr < ch.len() && ch[tr.right_ptr].0 <= t {
                    tr.right_front = ch[tr.right_ptr].1;
                    tr.right_ptr += 1;
                }
            }
        }
    }

    fn check_fronts(&mut self) {
        if self.contaminated_at.is_some() {
            return;
        }
        let Some(tr) = &self.tracker else { return };
        let hit_left = tr.left_seeded && {
            let guard = if self.count > 0 { self.sup.min(tr.floor) } else { tr.floor };
            tr.left_front >= guard
        };
        let hit_right = tr.right_seeded && {
            let ceil = -tr.floor;
            let guard = if self.count > 0 { self.inf.max(ceil) } else { ceil };
            tr.right_front <= guard
        };
        if hit_left || hit_right {
            self.contaminated_at = Some(self.now);
        }
    }

    /// Runs every remaining event.
    pub fn run_to_horizon(&mut self) {
        while self.step().is_some() {}
        self.settle(self.horizon);
    }

    /// Declares that no event of this process occurs up to `t` and brings
    /// the boundary bookkeeping up to `t`.
    pub fn settle(&mut self, t: f64) {
        let t = t.min(self.horizon);
        if t > self.now {
            if self.tracker.is_some() {
                self.advance_fronts(t);
                self.check_fronts();
            }
            self.now = t;
        }
    }

    #[inline]
    pub fn sup(&self) -> Option<i64> {
        (self.count > 0).then_some(self.sup)
    }

    #[inline]
    pub fn inf(&self) -> Option<i64> {
        (self.count > 0).then_some(self.inf)
    }

    /// Sup counting the virtual wall of a [`Cut::Wall`] process.
    pub fn upper_sup(&self) -> Option<i64> {
        let wall = match self.cut {
            Cut::Wall(b) if b > self.x_min => Some(b - 1),
            _ => None,
        };
        self.sup().max(wall)
    }

    pub fn is_occupied(&self, x: i64) -> bool {
        x >= self.x_min && x <= self.x_max && self.occ[self.log.index(x)]
    }

    pub fn occupied(&self) -> Vec<i64> {
        if self.count == 0 {
            return Vec::new();
        }
        (self.inf..=self.sup).filter(|&x| self.occ[self.log.index(x)]).collect()
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn births(&self) -> u64 {
        self.births
    }

    pub fn extinct_at(&self) -> Option<f64> {
        self.extinct_at
    }

    pub fn contaminated_at(&self) -> Option<f64> {
        self.contaminated_at
    }

    pub fn cut(&self) -> Cut {
        self.cut
    }

    pub fn log(&self) -> &'a EventLog {
        self.log
    }
}

/// Applies the next event of the family to every member that sees it.
/// Returns the event's key, or `None` once nothing is left to apply.
pub fn lockstep(procs: &mut [&mut Process<'_>]) -> Option<EventKey> {
    let key = procs.iter_mut().filter_map(|p| p.peek()).min()?;
    for p in procs.iter_mut() {
        if p.peek() == Some(key) {
            p.step();
        }
    }
    Some(key)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_event_log, EventLog, SimConfig};

    fn hand_log() -> EventLog {
        let cfg = SimConfig::new(1.0, 1, 1.0, 0).with_window(-3, 3);
        EventLog::from_events(cfg, &[(0, 0.7)], &[(0, 1, 0.5)]).unwrap()
    }

    #[test]
    fn hand_trace() {
        let log = hand_log();
        let mut p = Process::new(log.view(EdgeMask::FullGraph), [0], 0.0, 1.0).unwrap();
        let a = p.step().unwrap().change.unwrap();
        let b = p.step().unwrap().change.unwrap();
        assert!(p.step().is_none());
        assert_eq!((a.time, a.site, a.kind), (0.5, 1, TransitionKind::Born));
        assert_eq!((b.time, b.site, b.kind), (0.7, 0, TransitionKind::Died));
        assert_eq!(p.occupied(), vec![1]);
        assert_eq!(p.sup(), Some(1));
    }

    #[test]
    fn coalescence_is_a_no_op() {
        let log = hand_log();
        let mut p = Process::new(log.view(EdgeMask::FullGraph), [0, 1], 0.0, 1.0).unwrap();
        assert!(p.step().unwrap().change.is_none());
        p.run_to_horizon();
        assert_eq!(p.occupied(), vec![1]);
    }

    #[test]
    fn horizon_beyond_log_is_a_range_error() {
        let log = hand_log();
        let err = Process::new(log.view(EdgeMask::FullGraph), [0], 0.0, 2.0).unwrap_err();
        assert!(matches!(err, Error::Range { .. }));
    }

    #[test]
    fn cuts_bracket_the_uncut_process() {
        let cfg = SimConfig::new(2.0, 2, 10.0, 9).with_window(-60, 30);
        let log = build_event_log(cfg).unwrap();
        let view = log.view(EdgeMask::FullGraph);
        let init: Vec<i64> = (-60..=0).collect();
        let mut exact = Process::new(view, init.clone(), 0.0, 10.0).unwrap();
        let mut lo = Process::new(view, init.clone(), 0.0, 10.0).unwrap().with_cut(Cut::Empty(-20));
        let mut hi = Process::new(view, init, 0.0, 10.0).unwrap().with_cut(Cut::Wall(-20));
        let mut n = 0;
        while lockstep(&mut [&mut exact, &mut lo, &mut hi]).is_some() {
            let Cut::Wall(b) = hi.cut() else { unreachable!() };
            for x in -60..=30 {
                if lo.is_occupied(x) {
                    assert!(exact.is_occupied(x));
                }
                if exact.is_occupied(x) && x >= b {
                    assert!(hi.is_occupied(x), "site {x}");
                }
            }
            assert!(lo.sup() <= exact.sup() && exact.sup() <= hi.upper_sup());
            n += 1;
            if n % 200 == 0 {
                let b = lo.sup().unwrap_or(0) - 15;
                lo.raise_cut(b);
                hi.raise_cut(b);
            }
        }
    }
}
