use super::log::EventLog;

/// How far the truncation at one window edge can have propagated.
///
/// Starting from the `M` sites that could receive arrows from beyond the
/// edge, the front advances whenever an arrow leaves the region it has
/// already reached, occupancy and deaths ignored. A finite-window process
/// agrees with its infinite-lattice counterpart on every site strictly
/// beyond the front.
#[derive(Debug, Clone, PartialEq)]
pub struct InfluenceFront {
    initial: i64,
    changes: Vec<(f64, i64)>,
}

impl InfluenceFront {
    pub(crate) fn left(log: &EventLog) -> Self {
        let m = log.range();
        let (lo, hi) = (log.x_min(), log.x_max());
        let initial = (lo + m - 1).min(hi);
        let mut changes = Vec::new();
        let (mut f, mut t) = (initial, 0.0f64);
        while f < hi {
            let mut best: Option<(f64, i64)> = None;
            for a in (f - m + 1).max(lo)..=f {
                let (times, deltas) = log.timeline(a);
                let start = times.partition_point(|&s| s <= t);
                for k in start..times.len() {
                    if best.is_some_and(|(bt, _)| times[k] >= bt) {
                        break;
                    }
                    let target = a + deltas[k] as i64;
                    if deltas[k] != 0 && target > f {
                        best = Some((times[k], target));
                        break;
                    }
                }
            }
            match best {
                Some((bt, target)) => {
                    t = bt;
                    f = target;
                    changes.push((t, f));
                }
                None => break,
            }
        }
        InfluenceFront { initial, changes }
    }

    pub(crate) fn right(log: &EventLog) -> Self {
        let m = log.range();
        let (lo, hi) = (log.x_min(), log.x_max());
        let initial = (hi - m + 1).max(lo);
        let mut changes = Vec::new();
        let (mut f, mut t) = (initial, 0.0f64);
        while f > lo {
            let mut best: Option<(f64, i64)> = None;
            for a in f..=(f + m - 1).min(hi) {
                let (times, deltas) = log.timeline(a);
                let start = times.partition_point(|&s| s <= t);
                for k in start..times.len() {
                    if best.is_some_and(|(bt, _)| times[k] >= bt) {
                        break;
                    }
                    let target = a + deltas[k] as i64;
                    if deltas[k] != 0 && target < f {
                        best = Some((times[k], target));
                        break;
                    }
                }
            }
            match best {
                Some((bt, target)) => {
                    t = bt;
                    f = target;
                    changes.push((t, f));
                }
                None => break,
            }
        }
        InfluenceFront { initial, changes }
    }

    pub fn initial(&self) -> i64 {
        self.initial
    }

    /// `(time, new front)` in time order.
    pub fn changes(&self) -> &[(f64, i64)] {
        &self.changes
    }

    pub fn at(&self, t: f64) -> i64 {
        let k = self.changes.partition_point(|&(s, _)| s <= t);
        if k == 0 {
            self.initial
        } else {
            self.changes[k - 1].1
        }
    }
}
