use std::io::Write;

use serde::{Deserialize, Serialize};

use super::field::PercField;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PercStart {
    Sites(Vec<i64>),
    /// Every even column of the window: the finite stand-in for `2Z`.
    /// Row `n` is exact on `|y| <= half_width - n`.
    EvenLattice,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PercRun {
    pub start: PercStart,
    /// `levels[n]` is `W_n`, sorted; `levels[0]` is the start.
    pub levels: Vec<Vec<i64>>,
    /// First empty row, if any within `n_max`.
    pub tau: Option<u32>,
    pub n_max: u32,
    pub half_width: i64,
}

impl PercRun {
    pub fn level(&self, n: u32) -> &[i64] {
        self.levels.get(n as usize).map_or(&[], |v| v.as_slice())
    }

    pub fn left(&self, n: u32) -> Option<i64> {
        self.level(n).first().copied()
    }

    pub fn right(&self, n: u32) -> Option<i64> {
        self.level(n).last().copied()
    }

    pub fn contains(&self, y: i64, n: u32) -> bool {
        self.level(n).binary_search(&y).is_ok()
    }

    /// Survival to `n_max`, the stand-in for `τ = ∞`.
    pub fn survives(&self) -> bool {
        self.tau.is_none()
    }

    /// Columns of row `n` unaffected by the window truncation.
    pub fn exact_region(&self, n: u32) -> (i64, i64) {
        match self.start {
            PercStart::EvenLattice => (-(self.half_width - n as i64), self.half_width - n as i64),
            PercStart::Sites(_) => (-self.half_width, self.half_width),
        }
    }

    /// Writes `n,size,L,R,tau_proxy` for every row.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(["n", "size", "L", "R", "tau_proxy"])?;
        let tau = self.tau.map_or_else(|| format!(">{}", self.n_max), |t| t.to_string());
        let opt = |v: Option<i64>| v.map_or_else(String::new, |v| v.to_string());
        for n in 0..=self.n_max {
            csv.write_record([
                n.to_string(),
                self.level(n).len().to_string(),
                opt(self.left(n)),
                opt(self.right(n)),
                tau.clone(),
            ])?;
        }
        csv.flush()?;
        Ok(())
    }
}

/// `W_{n+1} = {y : w(y, n+1) = 1 and (y - 1 ∈ W_n or y + 1 ∈ W_n)}`.
pub fn evolve_percolation(field: &PercField, start: &PercStart, n_max: u32) -> Result<PercRun> {
    let hw = field.half_width();
    if n_max > field.n_max() {
        return Err(Error::Range {
            requested: n_max as f64,
            available: field.n_max() as f64,
        });
    }
    let row0: Vec<i64> = match start {
        PercStart::EvenLattice => (-hw..=hw).filter(|y| y % 2 == 0).collect(),
        PercStart::Sites(sites) => {
            if sites.is_empty() {
                return Err(Error::invalid("start", "must be nonempty"));
            }
            let extent = field.config().extent as i64;
            let mut v = sites.clone();
            v.sort_unstable();
            v.dedup();
            for &y in &v {
                if y % 2 != 0 {
                    return Err(Error::invalid("start", format!("site {y} is not on 2Z")));
                }
                if y.abs() > extent {
                    return Err(Error::invalid("start", format!("site {y} beyond the start extent {extent}")));
                }
            }
            v
        }
    };
    let width = (2 * hw + 1) as usize;
    let mut cur = vec![false; width];
    for &y in &row0 {
        cur[(y + hw) as usize] = true;
    }
    let mut levels = vec![row0];
    let mut tau = None;
    let mut next = vec![false; width];
    for n in 1..=n_max {
        let mut row = Vec::new();
        for (i, slot) in next.iter_mut().enumerate() {
            let y = i as i64 - hw;
            let fed = (i > 0 && cur[i - 1]) || (i + 1 < width && cur[i + 1]);
            *slot = fed && field.w(y, n);
            if *slot {
                row.push(y);
            }
        }
        std::mem::swap(&mut cur, &mut next);
        if row.is_empty() && tau.is_none() {
            tau = Some(n);
        }
        levels.push(row);
        if tau.is_some() {
            // Nothing comes back from an empty row.
            for _ in n + 1..=n_max {
                levels.push(Vec::new());
            }
            break;
        }
    }
    Ok(PercRun {
        start: start.clone(),
        levels,
        tau,
        n_max,
        half_width: hw,
    })
}

pub fn origin_run(field: &PercField) -> Result<PercRun> {
    evolve_percolation(field, &PercStart::Sites(vec![0]), field.n_max())
}

/// `W_n^0 = W_n^{2Z} ∩ [L_n, R_n]` at row `n`, or `None` when the origin
/// run dies before `n_max`.
pub fn coupling_identity_check(field: &PercField, n: u32) -> Result<Option<bool>> {
    let origin = origin_run(field)?;
    if !origin.survives() {
        return Ok(None);
    }
    let full = evolve_percolation(field, &PercStart::EvenLattice, n)?;
    Ok(Some(identity_holds(&origin, &full, n)))
}

pub(crate) fn identity_holds(origin: &PercRun, full: &PercRun, n: u32) -> bool {
    let (Some(l), Some(r)) = (origin.left(n), origin.right(n)) else {
        return origin.level(n).is_empty();
    };
    let clipped: Vec<i64> = full.level(n).iter().copied().filter(|&y| y >= l && y <= r).collect();
    clipped == origin.level(n)
}
