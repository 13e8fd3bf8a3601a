use serde::{Deserialize, Serialize};

use super::run::{PercRun, PercStart};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeficitVariant {
    /// Occupied count of `W_n^{2Z}` in `Y` below `ρ|Y|`.
    EvenLattice,
    /// Occupied count of `W_n^0` in `Y` below `ρ|Y|` while `W_n^0 ≠ ∅`.
    OriginAlive,
}

/// `X(n) ∩ [a, b]`: the columns of row `n` in the interval.
pub fn row_sites(n: u32, a: f64, b: f64) -> Vec<i64> {
    let lo = a.ceil() as i64;
    let hi = b.floor() as i64;
    (lo..=hi).filter(|y| (y + n as i64) % 2 == 0).collect()
}

/// Density deficit of `run` on `ys` at row `n`.
pub fn density_deficit(run: &PercRun, ys: &[i64], rho: f64, n: u32, variant: DeficitVariant) -> Result<bool> {
    if ys.is_empty() {
        return Err(Error::invalid("Y", "must be nonempty"));
    }
    if let Some(y) = ys.iter().find(|&&y| (y + n as i64) % 2 != 0) {
        return Err(Error::invalid("Y", format!("site {y} is not in X({n})")));
    }
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::invalid("rho", "must lie in (0, 1)"));
    }
    let (lo, hi) = run.exact_region(n);
    if ys.iter().any(|&y| y < lo || y > hi) {
        return Err(Error::invalid("Y", format!("must lie in the exact region [{lo}, {hi}] of row {n}")));
    }
    match (variant, &run.start) {
        (DeficitVariant::EvenLattice, PercStart::EvenLattice) => {}
        (DeficitVariant::OriginAlive, PercStart::Sites(s)) if s == &[0] => {}
        _ => return Err(Error::Usage("run start does not match the deficit variant".into())),
    }
    if variant == DeficitVariant::OriginAlive && run.level(n).is_empty() {
        return Ok(false);
    }
    let count = ys.iter().filter(|&&y| run.contains(y, n)).count();
    Ok((count as f64) < rho * ys.len() as f64)
}

/// Some block of `⌊b n⌋` consecutive points of `X(n) ∩ [-βn, βn]` holds
/// fewer than `ρ ⌊b n⌋` sites of `W_n^0`, with `W_n^0 ≠ ∅`.
pub fn scan_consecutive_runs(run0: &PercRun, n: u32, b: f64, beta: f64, rho: f64) -> Result<bool> {
    let k = (b * n as f64).floor() as usize;
    if k == 0 {
        return Err(Error::invalid("b", format!("floor(b n) must be at least 1, got b = {b}, n = {n}")));
    }
    if !(beta > 0.0 && beta < 1.0) || !(b > 0.0 && b <= beta) {
        return Err(Error::invalid("beta", "need 0 < b <= beta < 1"));
    }
    if run0.level(n).is_empty() {
        return Ok(false);
    }
    let nb = beta * n as f64;
    let occ: Vec<u32> = row_sites(n, -nb, nb)
        .iter()
        .map(|&y| u32::from(run0.contains(y, n)))
        .collect();
    if occ.len() < k {
        return Ok(false);
    }
    let limit = rho * k as f64;
    let mut count: u32 = occ[..k].iter().sum();
    if (count as f64) < limit {
        return Ok(true);
    }
    for i in k..occ.len() {
        count = count + occ[i] - occ[i - k];
        if (count as f64) < limit {
            return Ok(true);
        }
    }
    Ok(false)
}

/// `(n <= τ < n_max, survival to n_max with [L_n, R_n] ⊆ [-βn, βn])`.
pub fn extinction_and_speed_events(run0: &PercRun, n: u32, beta: f64) -> (bool, bool) {
    let late_death = run0.tau.is_some_and(|t| t >= n && t < run0.n_max);
    let slow = run0.survives() && {
        let nb = beta * n as f64;
        match (run0.left(n), run0.right(n)) {
            (Some(l), Some(r)) => l as f64 >= -nb && r as f64 <= nb,
            _ => false,
        }
    };
    (late_death, slow)
}
