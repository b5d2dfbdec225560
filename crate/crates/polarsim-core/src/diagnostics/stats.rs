//! Proportion intervals and a goodness-of-fit test.

use super::DiagnosticsError;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Wilson score interval for a binomial proportion at critical value `z`.
pub fn wilson_interval(
    successes: u64,
    trials: u64,
    z: f64,
) -> Result<(f64, f64), DiagnosticsError> {
    if trials == 0 {
        return Err(DiagnosticsError::EmptySample);
    }
    if successes > trials {
        return Err(DiagnosticsError::InvalidCounts { successes, trials });
    }
    if !(z.is_finite() && z > 0.0) {
        return Err(DiagnosticsError::InvalidZ { z });
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    Ok(((center - half).max(0.0), (center + half).min(1.0)))
}

/// Pearson chi-square test of the uniform distribution over the observed
/// categories; returns the p-value.
pub fn chi_square_uniform_pvalue(counts: &[u64]) -> Result<f64, DiagnosticsError> {
    let k = counts.len();
    if k < 2 {
        return Err(DiagnosticsError::NotEnoughCategories { got: k });
    }
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(DiagnosticsError::EmptySample);
    }
    let expected = total as f64 / k as f64;
    let stat: f64 =
        counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    let dist = ChiSquared::new((k - 1) as f64).expect("k >= 2");
    Ok(1.0 - dist.cdf(stat))
}
