//! Least-squares decay fits in log space.

use super::DiagnosticsError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecayModel {
    /// `value ~ C * rate^t`; the fitted `rate` is the per-step factor.
    Geometric,
    /// `value ~ C * t^rate`; the fitted `rate` is the exponent.
    PowerLaw,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub rate: f64,
    /// Fitted value at `t = 0` (geometric) or `t = 1` (power law).
    pub scale: f64,
    /// Root-mean-square residual in log space.
    pub residual: f64,
}

/// Fits `(t, value)` points by ordinary least squares on `ln value`.
/// Values must be strictly positive; power-law fits also need `t > 0`.
pub fn decay_rate_fit(
    points: &[(f64, f64)],
    model: DecayModel,
) -> Result<DecayFit, DiagnosticsError> {
    if points.len() < 3 {
        return Err(DiagnosticsError::TooFewPoints { got: points.len(), need: 3 });
    }
    let mut xs = Vec::with_capacity(points.len());
    let mut ys = Vec::with_capacity(points.len());
    for &(t, value) in points {
        if !(value.is_finite() && value > 0.0) {
            return Err(DiagnosticsError::NonPositiveValue { value });
        }
        let x = match model {
            DecayModel::Geometric => t,
            DecayModel::PowerLaw => {
                if !(t.is_finite() && t > 0.0) {
                    return Err(DiagnosticsError::NonPositiveTime { t });
                }
                t.ln()
            }
        };
        xs.push(x);
        ys.push(value.ln());
    }
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }
    if sxx == 0.0 {
        return Err(DiagnosticsError::TooFewPoints { got: 1, need: 3 });
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let mut ss = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        let r = y - (intercept + slope * x);
        ss += r * r;
    }
    let rate = match model {
        DecayModel::Geometric => slope.exp(),
        DecayModel::PowerLaw => slope,
    };
    Ok(DecayFit { rate, scale: intercept.exp(), residual: (ss / n).sqrt() })
}
