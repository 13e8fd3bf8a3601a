use statrs::distribution::{ContinuousCDF, Normal};

use super::TestReport;
use crate::error::{Error, Result};

/// Anderson–Darling `A^2` of the sample against the normal law with the
/// sample mean and standard deviation.
pub fn anderson_darling(sample: &[f64]) -> Result<f64> {
    let n = sample.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!("need at least 2 values, got {n}")));
    }
    let nf = n as f64;
    let mean = sample.iter().sum::<f64>() / nf;
    let sd = (sample.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nf - 1.0)).sqrt();
    if !(sd > 0.0) || !sd.is_finite() {
        return Err(Error::Degenerate("zero or undefined variance".into()));
    }
    let mut z: Vec<f64> = sample.iter().map(|x| (x - mean) / sd).collect();
    z.sort_by(f64::total_cmp);
    let normal = Normal::standard();
    let ln_cdf = |x: f64| normal.cdf(x).max(f64::MIN_POSITIVE).ln();
    let s: f64 = (0..n)
        .map(|i| (2 * i + 1) as f64 * (ln_cdf(z[i]) + ln_cdf(-z[n - 1 - i])))
        .sum();
    Ok(-nf - s / nf)
}

/// Anderson–Darling normality test with estimated mean and variance; the
/// p-value uses the small-sample adjusted statistic and the standard
/// piecewise approximation.
pub fn normality_test(sample: &[f64], level: f64) -> Result<TestReport> {
    if sample.len() < 20 {
        return Err(Error::InsufficientData(format!(
            "normality test needs at least 20 values, got {}",
            sample.len()
        )));
    }
    let a2 = anderson_darling(sample)?;
    let n = sample.len() as f64;
    let a = a2 * (1.0 + 0.75 / n + 2.25 / (n * n));
    let p = if a >= 0.6 {
        (1.2937 - 5.709 * a + 0.0186 * a * a).exp()
    } else if a >= 0.34 {
        (0.9177 - 4.279 * a - 1.38 * a * a).exp()
    } else if a >= 0.2 {
        1.0 - (-8.318 + 42.796 * a - 59.938 * a * a).exp()
    } else {
        1.0 - (-13.436 + 101.14 * a - 223.73 * a * a).exp()
    };
    Ok(TestReport::new("anderson_darling_normal", a, p, vec![sample.len()], level))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_sample_is_degenerate() {
        assert!(matches!(normality_test(&[1.0; 30], 0.01), Err(Error::Degenerate(_))));
        assert!(normality_test(&[1.0, 2.0], 0.01).is_err());
    }

    #[test]
    fn normal_quantiles_pass() {
        let normal = Normal::standard();
        let q: Vec<f64> = (1..=100).map(|k| normal.inverse_cdf(k as f64 / 101.0)).collect();
        let r = normality_test(&q, 0.01).unwrap();
        assert!(!r.reject && r.statistic < 0.3, "{r:?}");
    }
}
