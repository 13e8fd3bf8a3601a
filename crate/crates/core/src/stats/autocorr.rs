use crate::error::{Error, Result};

/// Lag-`lag` sample autocorrelation: mean lagged cross-product over the
/// `n - lag` pairs divided by the sample variance (both about the sample
/// mean).
pub fn lag_autocorrelation(sample: &[f64], lag: usize) -> Result<f64> {
    pooled_lag_autocorrelation(&[sample], lag).map(|(r, _)| r)
}

/// Autocorrelation pooled over several independent sequences: pairs are
/// only formed within a sequence, moments use the pooled mean. Returns the
/// coefficient and the number of observations.
pub fn pooled_lag_autocorrelation<S: AsRef<[f64]>>(seqs: &[S], lag: usize) -> Result<(f64, usize)> {
    let n: usize = seqs.iter().map(|s| s.as_ref().len()).sum();
    let pairs: usize = seqs.iter().map(|s| s.as_ref().len().saturating_sub(lag)).sum();
    if pairs == 0 {
        return Err(Error::InsufficientData(format!(
            "sample of size {n} has no pairs at lag {lag}"
        )));
    }
    let mean = seqs.iter().flat_map(|s| s.as_ref()).sum::<f64>() / n as f64;
    let var = seqs
        .iter()
        .flat_map(|s| s.as_ref())
        .map(|x| (x - mean).powi(2))
        .sum::<f64>()
        / n as f64;
    if !(var > 0.0) {
        return Err(Error::Degenerate("zero variance".into()));
    }
    let cov = seqs
        .iter()
        .map(|s| {
            let s = s.as_ref();
            s.iter()
                .zip(s.iter().skip(lag))
                .map(|(a, b)| (a - mean) * (b - mean))
                .sum::<f64>()
        })
        .sum::<f64>()
        / pairs as f64;
    Ok((cov / var, n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alternating_is_minus_one() {
        let s: Vec<f64> = (0..100).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        assert!((lag_autocorrelation(&s, 1).unwrap() + 1.0).abs() < 1e-12);
        assert!((lag_autocorrelation(&s, 2).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(lag_autocorrelation(&[2.0; 10], 1), Err(Error::Degenerate(_))));
        assert!(lag_autocorrelation(&[1.0, 2.0], 2).is_err());
    }
}
