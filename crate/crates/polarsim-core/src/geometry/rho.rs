//! Distance from a configuration to the polarized set.
//!
//! The polarized set collects all configurations of the form
//! `(sigma_1 v, ..., sigma_n v)` for a unit vector `v` and signs `sigma`.
//! For a fixed pattern the squared distance minimized over `v` collapses to
//! `2n - 2 * |sum_i sigma_i x_i|`, so the search space is the `2^(n-1)`
//! canonical sign patterns and the best center is the normalized signed sum.

use super::{
    canonical_sign_alignment, norm, Configuration, GeometryError, SignPattern, UnitVector,
    EXACT_PATTERN_LIMIT, ZERO_TOL,
};

/// Exact mode enumerates all canonical patterns; heuristic mode refines the
/// greedy alignment by single flips and reports an upper bound on the
/// distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistanceMode {
    Exact,
    Heuristic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolarizedDistance {
    /// Euclidean distance to the polarized set (exact) or an upper bound on
    /// it (heuristic).
    pub rho: f64,
    /// Canonical pattern realizing `rho`.
    pub argmin_pattern: SignPattern,
    /// Center of the nearest polarized configuration.
    pub argmin_center: UnitVector,
}

/// Distance from `x` to the polarized set.
///
/// Exact mode is rejected above [`EXACT_PATTERN_LIMIT`] agents; heuristic
/// mode scales to any population but only promises an upper bound.
pub fn distance_to_polarized(
    x: &Configuration,
    mode: DistanceMode,
) -> Result<PolarizedDistance, GeometryError> {
    match mode {
        DistanceMode::Exact => exact(x),
        DistanceMode::Heuristic => Ok(heuristic(x)),
    }
}

fn exact(x: &Configuration) -> Result<PolarizedDistance, GeometryError> {
    let n = x.n();
    if n > EXACT_PATTERN_LIMIT {
        return Err(GeometryError::ExactTooLarge { n, limit: EXACT_PATTERN_LIMIT });
    }
    let d = x.dim();

    // Walk canonical patterns in Gray-code order over agents 1..n so each
    // move flips a single agent in the running signed sum.
    let mut signs = vec![1i8; n];
    let mut sum: Vec<f64> = vec![0.0; d];
    for a in x.agents() {
        for k in 0..d {
            sum[k] += a.coords()[k];
        }
    }
    let mut best_norm2 = sq_norm(&sum);
    let mut best_index = 0u64;

    let patterns = 1u64 << (n - 1);
    let mut prev_gray = 0u64;
    for m in 1..patterns {
        let gray = m ^ (m >> 1);
        let flipped_bit = (gray ^ prev_gray).trailing_zeros() as usize;
        prev_gray = gray;
        let agent = flipped_bit + 1;
        let s = f64::from(signs[agent]);
        let coords = x.agent(agent).coords();
        for k in 0..d {
            sum[k] -= 2.0 * s * coords[k];
        }
        signs[agent] = -signs[agent];
        let norm2 = sq_norm(&sum);
        if norm2 > best_norm2 {
            best_norm2 = norm2;
            best_index = gray;
        }
    }

    let pattern = SignPattern::from_index(n, best_index).expect("index within canonical range");
    Ok(finish(x, pattern, best_norm2.sqrt()))
}

/// Greedy alignment followed by single-sign flips until no flip grows the
/// signed sum. The result is a local optimum, hence `rho` is an upper bound.
fn heuristic(x: &Configuration) -> PolarizedDistance {
    let n = x.n();
    let d = x.dim();
    let (pattern, _) = canonical_sign_alignment(x);
    let mut signs = pattern.signs().to_vec();
    let mut sum = vec![0.0; d];
    for (a, &s) in x.agents().iter().zip(&signs) {
        for k in 0..d {
            sum[k] += f64::from(s) * a.coords()[k];
        }
    }
    let mut norm2 = sq_norm(&sum);
    // Flipping agent i changes |sum|^2 by 4 - 4 sigma_i <x_i, sum>; accept
    // strict improvements only, so the loop terminates.
    let mut improved = true;
    while improved {
        improved = false;
        for i in 0..n {
            let coords = x.agent(i).coords();
            let s = f64::from(signs[i]);
            let gain = 4.0 - 4.0 * s * super::dot(coords, &sum);
            if gain > 1e-12 {
                for k in 0..d {
                    sum[k] -= 2.0 * s * coords[k];
                }
                signs[i] = -signs[i];
                norm2 = sq_norm(&sum);
                improved = true;
            }
        }
    }
    if signs[0] == -1 {
        // Global flip leaves |sum| unchanged; restore canonical form.
        for s in &mut signs {
            *s = -*s;
        }
        for k in 0..d {
            sum[k] = -sum[k];
        }
    }
    let pattern = SignPattern::canonical(signs).expect("signs stay in -1/+1");
    finish(x, pattern, norm2.sqrt())
}

fn finish(x: &Configuration, pattern: SignPattern, sum_norm: f64) -> PolarizedDistance {
    let n = x.n();
    let d = x.dim();
    let rho = (2.0 * n as f64 - 2.0 * sum_norm).max(0.0).sqrt();
    let mut sum = vec![0.0; d];
    for (a, &s) in x.agents().iter().zip(pattern.signs()) {
        for k in 0..d {
            sum[k] += f64::from(s) * a.coords()[k];
        }
    }
    let argmin_center = if sum_norm < ZERO_TOL {
        // Fully balanced signed sum: every center is equally distant.
        UnitVector::basis(d, 0).expect("d >= 2")
    } else {
        UnitVector::from_normalized(sum.iter().map(|c| c / norm(&sum)).collect())
    };
    PolarizedDistance { rho, argmin_pattern: pattern, argmin_center }
}

fn sq_norm(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum()
}
