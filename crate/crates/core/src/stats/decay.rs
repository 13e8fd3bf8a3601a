use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayPoint {
    pub n: f64,
    pub p_hat: f64,
    pub trials: u64,
}

impl DecayPoint {
    pub fn successes(&self) -> u64 {
        (self.p_hat * self.trials as f64).round() as u64
    }
}

/// Fit of `p_n ≈ C exp(-γ n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub c_hat: f64,
    pub gamma_hat: f64,
    pub r_squared: f64,
    /// Points used by the fit.
    pub support: Vec<DecayPoint>,
}

/// Least squares of `ln p̂_n` on `n` over the points with at least five
/// successes.
pub fn decay_fit(points: &[DecayPoint]) -> Result<DecayFit> {
    let support: Vec<DecayPoint> = points
        .iter()
        .copied()
        .filter(|p| p.successes() >= 5 && p.p_hat > 0.0)
        .collect();
    if support.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} usable points (successes >= 5), need 3",
            support.len()
        )));
    }
    let k = support.len() as f64;
    let xs: Vec<f64> = support.iter().map(|p| p.n).collect();
    let ys: Vec<f64> = support.iter().map(|p| p.p_hat.ln()).collect();
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Degenerate("all points share one n".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { (1.0 - ss_res / ss_tot).clamp(0.0, 1.0) };
    Ok(DecayFit {
        c_hat: intercept.exp(),
        gamma_hat: -slope,
        r_squared,
        support,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exact(c: f64, g: f64) -> Vec<DecayPoint> {
        (1..=6)
            .map(|i| {
                let n = 5.0 * i as f64;
                DecayPoint { n, p_hat: c * (-g * n).exp(), trials: 1 << 40 }
            })
            .collect()
    }

    #[test]
    fn recovers_exact_parameters() {
        let f = decay_fit(&exact(1.0, 0.5)).unwrap();
        assert!((f.gamma_hat - 0.5).abs() < 1e-10 && (f.r_squared - 1.0).abs() < 1e-12);
        let f = decay_fit(&exact(0.3, 0.2)).unwrap();
        assert!((f.c_hat - 0.3).abs() / 0.3 < 1e-10 && (f.gamma_hat - 0.2).abs() / 0.2 < 1e-10);
    }

    #[test]
    fn needs_three_usable_points() {
        let pts = [
            DecayPoint { n: 1.0, p_hat: 0.5, trials: 100 },
            DecayPoint { n: 2.0, p_hat: 0.25, trials: 100 },
            DecayPoint { n: 3.0, p_hat: 0.02, trials: 100 },
        ];
        assert!(matches!(decay_fit(&pts), Err(Error::InsufficientData(_))));
    }
}
