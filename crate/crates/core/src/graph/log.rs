use std::sync::OnceLock;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use super::config::SimConfig;
use super::front::InfluenceFront;
use crate::error::{Error, Result};
use crate::seeding::stream_rng;

/// Which directed edges of `Z_M` a view admits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeMask {
    FullGraph,
    /// Only arrows with both endpoints `<= 0`: the subgraph on `{0, -1, ...}`.
    HalfLine,
}

impl EdgeMask {
    #[inline]
    pub fn allows(self, from: i64, to: i64) -> bool {
        match self {
            EdgeMask::FullGraph => true,
            EdgeMask::HalfLine => from <= 0 && to <= 0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EdgeMask::FullGraph => "full_graph",
            EdgeMask::HalfLine => "half_line",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EventKind {
    Death { site: i64 },
    Arrow { from: i64, to: i64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub time: f64,
    pub kind: EventKind,
}

impl Event {
    /// Total order: time, then deaths before arrows, then source, then target.
    pub fn sort_key(&self) -> (u64, u8, i64, i64) {
        match self.kind {
            EventKind::Death { site } => (self.time.to_bits(), 0, site, site),
            EventKind::Arrow { from, to } => (self.time.to_bits(), 1, from, to),
        }
    }
}

/// Identifier of one Poisson stream, used as the ChaCha stream number.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Stream {
    Death(i64),
    Arrow(i64, i64),
    Mark(i64, i64),
}

impl Stream {
    pub(crate) fn code(self) -> u64 {
        let (kind, site, delta) = match self {
            Stream::Death(x) => (0u64, x, 0),
            Stream::Arrow(x, y) => (1, x, y - x),
            Stream::Mark(x, y) => (2, x, y - x),
        };
        ((site as i32 as u32 as u64) << 32) | (kind << 16) | ((delta + 128) as u8 as u64)
    }
}

/// A realized graphical representation on `[x_min, x_max] × (0, T]`.
///
/// Stored per source site: every site owns one timeline holding its death
/// times and the times of the arrows leaving it, sorted by
/// `(time, death < arrow, target)`. Merging the timelines in that order
/// across sites gives the global schedule.
#[derive(Debug, Clone)]
pub struct EventLog {
    config: SimConfig,
    offsets: Vec<usize>,
    times: Vec<f64>,
    /// 0 for a death, otherwise the arrow target minus the source.
    deltas: Vec<i8>,
    fronts: OnceLock<(InfluenceFront, InfluenceFront)>,
}

impl PartialEq for EventLog {
    fn eq(&self, other: &Self) -> bool {
        self.config == other.config
            && self.offsets == other.offsets
            && self.deltas == other.deltas
            && self
                .times
                .iter()
                .zip(&other.times)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

fn push_poisson(rng: &mut ChaCha8Rng, rate: f64, horizon: f64, mut emit: impl FnMut(f64)) {
    let mut t = 0.0f64;
    loop {
        let gap: f64 = rng.sample::<f64, _>(Exp1) / rate;
        let next = t + gap;
        if next > horizon {
            break;
        }
        // A gap that rounds away would duplicate a time: redraw it.
        if next <= t {
            continue;
        }
        t = next;
        emit(t);
    }
}

/// Samples every death and arrow stream of the window.
pub fn build_event_log(config: SimConfig) -> Result<EventLog> {
    config.validate()?;
    let m = config.range as i64;
    let width = config.width();
    let per_site = config.horizon * (1.0 + 2.0 * m as f64 * config.mu);
    let mut offsets = Vec::with_capacity(width + 1);
    let mut times = Vec::with_capacity((per_site * width as f64 * 1.05) as usize + 16);
    let mut deltas = Vec::with_capacity(times.capacity());
    let mut scratch: Vec<(f64, i8)> = Vec::new();
    offsets.push(0);
    for x in config.x_min..=config.x_max {
        scratch.clear();
        let mut rng = stream_rng(config.seed, Stream::Death(x).code());
        push_poisson(&mut rng, 1.0, config.horizon, |t| scratch.push((t, 0)));
        for d in -m..=m {
            let y = x + d;
            if d == 0 || !config.contains(y) {
                continue;
            }
            let mut rng = stream_rng(config.seed, Stream::Arrow(x, y).code());
            push_poisson(&mut rng, config.mu, config.horizon, |t| scratch.push((t, d as i8)));
        }
        sort_timeline(&mut scratch);
        for &(t, d) in &scratch {
            times.push(t);
            deltas.push(d);
        }
        offsets.push(times.len());
    }
    Ok(EventLog {
        config,
        offsets,
        times,
        deltas,
        fronts: OnceLock::new(),
    })
}

// Stable sort: each stream arrives as one sorted run, which the run
// detection merges in near-linear time.
fn sort_timeline(events: &mut [(f64, i8)]) {
    events.sort_by(|a, b| {
        a.0.total_cmp(&b.0)
            .then_with(|| (a.1 != 0).cmp(&(b.1 != 0)))
            .then_with(|| a.1.cmp(&b.1))
    });
}

impl EventLog {
    /// Log holding exactly the given events. Used for hand-built scenarios
    /// and for deserialization.
    pub fn from_events(config: SimConfig, deaths: &[(i64, f64)], arrows: &[(i64, i64, f64)]) -> Result<Self> {
        config.validate()?;
        let width = config.width();
        let mut per_site: Vec<Vec<(f64, i8)>> = vec![Vec::new(); width];
        let check_time = |t: f64| -> Result<()> {
            if t.is_finite() && t > 0.0 && t <= config.horizon {
                Ok(())
            } else {
                Err(Error::MalformedLog(format!(
                    "event time {t} outside (0, {}]",
                    config.horizon
                )))
            }
        };
        for &(x, t) in deaths {
            if !config.contains(x) {
                return Err(Error::MalformedLog(format!("death site {x} outside the window")));
            }
            check_time(t)?;
            per_site[(x - config.x_min) as usize].push((t, 0));
        }
        for &(x, y, t) in arrows {
            if !config.contains(x) || !config.contains(y) {
                return Err(Error::MalformedLog(format!("arrow {x}>{y} leaves the window")));
            }
            let d = y - x;
            if d == 0 || d.unsigned_abs() > config.range as u64 {
                return Err(Error::MalformedLog(format!(
                    "arrow {x}>{y} is not an edge of Z_{}",
                    config.range
                )));
            }
            check_time(t)?;
            per_site[(x - config.x_min) as usize].push((t, d as i8));
        }
        let mut offsets = Vec::with_capacity(width + 1);
        let mut times = Vec::new();
        let mut deltas = Vec::new();
        offsets.push(0);
        for (i, events) in per_site.iter_mut().enumerate() {
            sort_timeline(events);
            for pair in events.windows(2) {
                if pair[0].1 == pair[1].1 && pair[0].0 == pair[1].0 {
                    return Err(Error::MalformedLog(format!(
                        "duplicate time {} in a stream of site {}",
                        pair[0].0,
                        config.x_min + i as i64
                    )));
                }
            }
            for &(t, d) in events.iter() {
                times.push(t);
                deltas.push(d);
            }
            offsets.push(times.len());
        }
        Ok(EventLog {
            config,
            offsets,
            times,
            deltas,
            fronts: OnceLock::new(),
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn horizon(&self) -> f64 {
        self.config.horizon
    }

    pub fn range(&self) -> i64 {
        self.config.range as i64
    }

    pub fn x_min(&self) -> i64 {
        self.config.x_min
    }

    pub fn x_max(&self) -> i64 {
        self.config.x_max
    }

    #[inline]
    pub(crate) fn index(&self, site: i64) -> usize {
        (site - self.config.x_min) as usize
    }

    /// Times and target offsets of everything leaving `site` (0 = death).
    #[inline]
    pub fn timeline(&self, site: i64) -> (&[f64], &[i8]) {
        let i = self.index(site);
        let (a, b) = (self.offsets[i], self.offsets[i + 1]);
        (&self.times[a..b], &self.deltas[a..b])
    }

    pub fn deaths(&self, site: i64) -> impl Iterator<Item = f64> + '_ {
        let (t, d) = self.timeline(site);
        t.iter().zip(d).filter(|(_, &d)| d == 0).map(|(&t, _)| t)
    }

    pub fn arrows(&self, from: i64, to: i64) -> impl Iterator<Item = f64> + '_ {
        let (t, d) = self.timeline(from);
        let want = to - from;
        t.iter().zip(d).filter(move |(_, &d)| d != 0 && d as i64 == want).map(|(&t, _)| t)
    }

    pub fn event_count(&self) -> usize {
        self.times.len()
    }

    pub fn arrow_count(&self) -> usize {
        self.deltas.iter().filter(|&&d| d != 0).count()
    }

    pub fn death_count(&self) -> usize {
        self.event_count() - self.arrow_count()
    }

    /// All events in the global total order.
    pub fn events(&self) -> Vec<Event> {
        let mut out = Vec::with_capacity(self.times.len());
        for x in self.config.x_min..=self.config.x_max {
            let (t, d) = self.timeline(x);
            for (&t, &d) in t.iter().zip(d) {
                let kind = if d == 0 {
                    EventKind::Death { site: x }
                } else {
                    EventKind::Arrow { from: x, to: x + d as i64 }
                };
                out.push(Event { time: t, kind });
            }
        }
        out.sort_unstable_by_key(Event::sort_key);
        out
    }

    /// Keeps each arrow independently with probability `mu / self.mu`,
    /// using per-edge mark streams, so the result is a log at rate `mu`
    /// coupled to this one (same deaths, a subset of the arrows).
    pub fn thinned(&self, mu: f64) -> Result<EventLog> {
        if !(mu > 0.0 && mu <= self.config.mu) {
            return Err(Error::invalid(
                "mu",
                format!("thinned rate must lie in (0, {}], got {mu}", self.config.mu),
            ));
        }
        let keep = mu / self.config.mu;
        let m = self.range();
        let mut offsets = Vec::with_capacity(self.offsets.len());
        let mut times = Vec::with_capacity(self.times.len());
        let mut deltas = Vec::with_capacity(self.deltas.len());
        offsets.push(0);
        let mut marks: Vec<Option<ChaCha8Rng>> = Vec::new();
        for x in self.config.x_min..=self.config.x_max {
            marks.clear();
            marks.resize_with((2 * m + 1) as usize, || None);
            let (t, d) = self.timeline(x);
            for (&t, &d) in t.iter().zip(d) {
                if d != 0 {
                    let slot = (d as i64 + m) as usize;
                    let seed = self.config.seed;
                    let rng = marks[slot]
                        .get_or_insert_with(|| stream_rng(seed, Stream::Mark(x, x + d as i64).code()));
                    let u: f64 = rng.random();
                    if u >= keep {
                        continue;
                    }
                }
                times.push(t);
                deltas.push(d);
            }
            offsets.push(times.len());
        }
        Ok(EventLog {
            config: SimConfig { mu, ..self.config },
            offsets,
            times,
            deltas,
            fronts: OnceLock::new(),
        })
    }

    fn fronts(&self) -> &(InfluenceFront, InfluenceFront) {
        self.fronts
            .get_or_init(|| (InfluenceFront::left(self), InfluenceFront::right(self)))
    }

    /// Sites at or below this value at time `t` may feel the missing
    /// lattice beyond `x_min`.
    pub fn left_front(&self) -> &InfluenceFront {
        &self.fronts().0
    }

    /// Sites at or above this value at time `t` may feel the missing
    /// lattice beyond `x_max`.
    pub fn right_front(&self) -> &InfluenceFront {
        &self.fronts().1
    }

    pub fn view(&self, mask: EdgeMask) -> LogView<'_> {
        LogView { log: self, mask }
    }
}

/// A log seen through an edge mask. Deaths are never masked.
#[derive(Debug, Clone, Copy)]
pub struct LogView<'a> {
    pub log: &'a EventLog,
    pub mask: EdgeMask,
}

pub fn masked_view(log: &EventLog, mask: EdgeMask) -> LogView<'_> {
    log.view(mask)
}

impl<'a> LogView<'a> {
    pub fn arrows(&self, from: i64, to: i64) -> Vec<f64> {
        if self.mask.allows(from, to) {
            self.log.arrows(from, to).collect()
        } else {
            Vec::new()
        }
    }

    pub fn deaths(&self, site: i64) -> impl Iterator<Item = f64> + 'a {
        self.log.deaths(site)
    }

    pub fn events(&self) -> Vec<Event> {
        let mask = self.mask;
        self.log
            .events()
            .into_iter()
            .filter(|e| match e.kind {
                EventKind::Death { .. } => true,
                EventKind::Arrow { from, to } => mask.allows(from, to),
            })
            .collect()
    }
}
