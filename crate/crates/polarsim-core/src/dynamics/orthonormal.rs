//! Closed form for the correlation model driven by basis-vector issues.
//!
//! With issue `e_j` the correlation update multiplies coordinate `j` by
//! `1 + eta` and renormalizes, so a whole trajectory collapses to the issue
//! counts: after `c_j` draws of each basis vector the state is
//! `normalize(v_j (1 + eta)^{c_j})_j`. Signs never change and coordinates
//! that start at zero stay there.

use super::DynamicsError;
use crate::geometry::{GeometryError, UnitVector, ZERO_TOL};

/// Evaluates the trajectory endpoint from issue counts, in log space so that
/// large counts neither overflow nor flush the whole vector to zero.
pub fn orthonormal_closed_form(
    v0: &UnitVector,
    eta: f64,
    counts: &[u64],
) -> Result<UnitVector, DynamicsError> {
    if !(eta.is_finite() && eta > 0.0) {
        return Err(DynamicsError::InvalidEta { eta });
    }
    let d = v0.dim();
    if counts.len() != d {
        return Err(GeometryError::DimensionMismatch { expected: d, got: counts.len() }.into());
    }
    let log_gain = eta.ln_1p();
    let mut log_mag = vec![f64::NEG_INFINITY; d];
    let mut peak = f64::NEG_INFINITY;
    for (i, &v) in v0.coords().iter().enumerate() {
        if v != 0.0 {
            log_mag[i] = v.abs().ln() + counts[i] as f64 * log_gain;
            peak = peak.max(log_mag[i]);
        }
    }
    let mut scaled = vec![0.0; d];
    let mut norm_sq = 0.0;
    for (i, &v) in v0.coords().iter().enumerate() {
        if v != 0.0 {
            scaled[i] = v.signum() * (log_mag[i] - peak).exp();
            norm_sq += scaled[i] * scaled[i];
        }
    }
    let norm = norm_sq.sqrt();
    if !norm.is_finite() || norm < ZERO_TOL {
        return Err(GeometryError::ZeroVector { norm }.into());
    }
    for s in &mut scaled {
        *s /= norm;
    }
    Ok(UnitVector::new(scaled)?)
}
