//! Covering-cap potential: the smallest angular radius of a spherical cap
//! containing the whole configuration.
//!
//! `phi(X) = min_{|v|=1} max_i angle(v, x_i)`, equivalently the maximizer of
//! `min_i <v, x_i>`. The primal path is projected supergradient ascent along
//! the worst agent (ties averaged) with step `c/sqrt(k)`; whenever the best
//! value stalls below the tolerance for a patience window the step scale `c`
//! is halved and the ascent restarts from the incumbent. For configurations
//! strictly inside a hemisphere the same problem is dual to the minimum-norm
//! point of the hull of the agents, so a Frank-Wolfe polish pins the answer
//! down to certificate accuracy; the residual sandwiches the optimum between
//! the achieved cap radius and the hull-norm lower bound.

use super::hull::min_norm_point;
use super::{
    angle_normalized, dot, norm, Configuration, GeometryError, UnitVector, ZERO_TOL,
};

/// Default stall tolerance of the ascent, in inner-product units.
pub const PHI_DEFAULT_TOL: f64 = 1e-7;

const PATIENCE: usize = 50;
const INITIAL_STEP_SCALE: f64 = 1.0;
const MIN_STEP_SCALE: f64 = 1e-9;
const MAX_RESTARTS: usize = 60;
const MAX_INNER_ITERS: usize = 4_000;
const MAX_TOTAL_ITERS: usize = 60_000;
const TIE_EPS: f64 = 1e-12;
// Value resolution of the minimum-norm polish: the hull solver's gap target
// leaves the dual center's objective uncertain at about this scale.
const DUAL_TIE_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct PhiResult {
    /// Cap radius in radians, in `[0, pi]`.
    pub phi: f64,
    /// Center attaining `phi`; one of possibly many for symmetric inputs.
    pub center: UnitVector,
    /// Ascent plus polish iterations.
    pub iterations: usize,
    /// Certified optimality gap in radians: the reported value minus the
    /// dual lower bound `arccos` of the hull's minimum norm. `pi` when the
    /// configuration is not strictly one-sided and no certificate exists,
    /// leaving only a best-effort local answer.
    pub residual: f64,
}

/// Computes the covering-cap potential of `x`.
///
/// Intended for configurations lying strictly on one side of a hyperplane;
/// outside that regime the answer is a local optimum flagged by `residual`.
/// Exactly antipodal pairs are rejected since no cap of radius below `pi`
/// exists and the mean initializer carries no direction.
pub fn phi_potential(x: &Configuration, tol: f64) -> Result<PhiResult, GeometryError> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(GeometryError::InvalidTolerance { tol });
    }
    let n = x.n();
    let d = x.dim();
    if n == 1 {
        return Ok(PhiResult {
            phi: 0.0,
            center: x.agent(0).clone(),
            iterations: 0,
            residual: 0.0,
        });
    }
    for i in 0..n {
        for j in i + 1..n {
            if dot(x.agent(i).coords(), x.agent(j).coords()) <= -1.0 + 1e-12 {
                return Err(GeometryError::DegenerateInput);
            }
        }
    }

    // Start from the normalized mean; for balanced inputs whose mean
    // vanishes, the first agent is as good a point as any.
    let mut mean = vec![0.0; d];
    for a in x.agents() {
        for k in 0..d {
            mean[k] += a.coords()[k];
        }
    }
    let mut v = if norm(&mean) < ZERO_TOL {
        x.agent(0).coords().to_vec()
    } else {
        let m = norm(&mean);
        mean.iter().map(|c| c / m).collect()
    };

    let mut best_val = min_dot(x, &v);
    let mut best_v = v.clone();
    let mut total_iters = 0usize;
    let mut scale = INITIAL_STEP_SCALE;
    let mut grad = vec![0.0; d];

    for restart in 0..MAX_RESTARTS {
        let restart_start_val = best_val;
        let mut window_best = best_val;
        let mut since_improve = 0usize;
        let mut k = 0usize;
        while since_improve < PATIENCE && k < MAX_INNER_ITERS && total_iters < MAX_TOTAL_ITERS {
            k += 1;
            total_iters += 1;

            // Supergradient: average of the agents attaining the minimum.
            let mut min = f64::INFINITY;
            for a in x.agents() {
                min = min.min(dot(a.coords(), &v));
            }
            grad.iter_mut().for_each(|g| *g = 0.0);
            let mut ties = 0.0;
            for a in x.agents() {
                if dot(a.coords(), &v) <= min + TIE_EPS {
                    ties += 1.0;
                    for (g, c) in grad.iter_mut().zip(a.coords()) {
                        *g += c;
                    }
                }
            }
            let step = scale / (k as f64).sqrt() / ties;
            for (vk, g) in v.iter_mut().zip(&grad) {
                *vk += step * g;
            }
            let vn = norm(&v);
            if vn < ZERO_TOL {
                // The step cancelled the iterate; restart from the incumbent.
                v.copy_from_slice(&best_v);
                since_improve += 1;
                continue;
            }
            v.iter_mut().for_each(|c| *c /= vn);

            let val = min_dot(x, &v);
            if val > best_val {
                best_val = val;
                best_v.copy_from_slice(&v);
            }
            if val >= window_best + tol {
                window_best = val;
                since_improve = 0;
            } else {
                since_improve += 1;
            }
        }
        let improved = best_val - restart_start_val;
        if (restart > 0 && improved < tol)
            || scale <= MIN_STEP_SCALE
            || total_iters >= MAX_TOTAL_ITERS
        {
            break;
        }
        scale *= 0.5;
        v.copy_from_slice(&best_v);
    }

    let phi_primal = max_angle_to(x, &best_v);

    // Dual route: the optimal center is the normalized minimum-norm point of
    // the agent hull whenever that norm is positive (one-sided input).
    let points: Vec<Vec<f64>> = x.agents().iter().map(|a| a.coords().to_vec()).collect();
    let mn = min_norm_point(&points, 0.0, 50_000);
    let mut phi = phi_primal;
    let mut center = best_v;
    let mut residual = std::f64::consts::PI;
    if mn.norm >= 1e-9 {
        let dual_center: Vec<f64> = mn.point.iter().map(|c| c / mn.norm).collect();
        let phi_dual = max_angle_to(x, &dual_center);
        // The dual center wins ties: flat directions of the ascent objective
        // can leave the ascent center far from optimal even when its value
        // looks converged, while the minimum-norm point has no such slack.
        // The tie window never drops below the polish's own precision, since
        // below that the comparison is noise and position quality should
        // decide.
        if phi_dual <= phi_primal + tol.max(DUAL_TIE_FLOOR) {
            phi = phi_dual;
            center = dual_center;
        }
        // Any center certifies from above; the hull norm certifies from
        // below, since the optimum satisfies cos(phi) = |w| at the true
        // minimum-norm point and the polish only ever overestimates |w|.
        let lower_bound = mn.norm.min(1.0).acos();
        residual = (phi - lower_bound).max(0.0);
    }

    Ok(PhiResult {
        phi,
        center: UnitVector::from_normalized(center),
        iterations: total_iters + mn.iterations,
        residual,
    })
}

fn min_dot(x: &Configuration, v: &[f64]) -> f64 {
    x.agents().iter().map(|a| dot(a.coords(), v)).fold(f64::INFINITY, f64::min)
}

fn max_angle_to(x: &Configuration, v: &[f64]) -> f64 {
    x.agents().iter().map(|a| angle_normalized(a.coords(), v)).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::super::project_to_sphere;
    use super::*;
    use std::f64::consts::PI;

    fn config(rows: &[&[f64]]) -> Configuration {
        Configuration::new(rows.iter().map(|r| project_to_sphere(r).unwrap()).collect()).unwrap()
    }

    #[test]
    fn two_vectors_split_the_angle() {
        let theta: f64 = 1.1;
        let x = config(&[&[1.0, 0.0], &[theta.cos(), theta.sin()]]);
        let out = phi_potential(&x, PHI_DEFAULT_TOL).unwrap();
        assert!((out.phi - theta / 2.0).abs() < 1e-9, "phi {} vs {}", out.phi, theta / 2.0);
        assert!(out.residual < 1e-6);
    }

    #[test]
    fn orthogonal_basis_triple_matches_symmetric_center() {
        let x = config(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]);
        let out = phi_potential(&x, PHI_DEFAULT_TOL).unwrap();
        let expected = (1.0 / 3.0f64.sqrt()).acos();
        assert!((out.phi - expected).abs() < 1e-9);
        // The symmetric center is unique here.
        for c in out.center.coords() {
            assert!((c - 1.0 / 3.0f64.sqrt()).abs() < 1e-6);
        }
    }

    #[test]
    fn singleton_has_zero_potential() {
        let x = config(&[&[0.0, 1.0]]);
        let out = phi_potential(&x, PHI_DEFAULT_TOL).unwrap();
        assert_eq!(out.phi, 0.0);
        assert_eq!(out.iterations, 0);
    }

    #[test]
    fn antipodal_pair_is_rejected() {
        let x = config(&[&[1.0, 0.0], &[-1.0, 0.0]]);
        assert!(matches!(
            phi_potential(&x, PHI_DEFAULT_TOL),
            Err(GeometryError::DegenerateInput)
        ));
    }

    #[test]
    fn phi_equals_max_angle_from_center() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(3);
        for _ in 0..50 {
            let anchor = super::super::haar_unit_vector(3, &mut rng).unwrap();
            let agents: Vec<_> = (0..4)
                .map(|_| {
                    loop {
                        let u = super::super::haar_unit_vector(3, &mut rng).unwrap();
                        if dot(u.coords(), anchor.coords()) > 0.3 {
                            break u;
                        }
                    }
                })
                .collect();
            let x = Configuration::new(agents).unwrap();
            let out = phi_potential(&x, PHI_DEFAULT_TOL).unwrap();
            let reached = x
                .agents()
                .iter()
                .map(|a| angle_normalized(a.coords(), out.center.coords()))
                .fold(0.0, f64::max);
            assert!(out.phi >= reached - PHI_DEFAULT_TOL);
            assert!(out.residual < 1e-5);
        }
    }

    #[test]
    fn circle_grid_oracle_agrees() {
        // Brute-force minimax over a dense grid of candidate centers.
        let x = config(&[&[1.0, 0.0], &[0.94, 0.4], &[0.6, 0.8]]);
        let grid = 100_000;
        let mut oracle = f64::INFINITY;
        for j in 0..grid {
            let t = 2.0 * PI * j as f64 / grid as f64;
            let v = [t.cos(), t.sin()];
            let worst = x
                .agents()
                .iter()
                .map(|a| angle_normalized(a.coords(), &v))
                .fold(0.0, f64::max);
            oracle = oracle.min(worst);
        }
        let out = phi_potential(&x, PHI_DEFAULT_TOL).unwrap();
        let pitch = 2.0 * PI / grid as f64;
        assert!((out.phi - oracle).abs() < 2.0 * pitch);
    }

    #[test]
    fn potential_is_tiny_for_clustered_configurations() {
        // Near-consensus input: the solver has to resolve angles ~1e-6.
        let eps = 1e-6;
        let x = config(&[
            &[1.0, 0.0, 0.0],
            &[1.0, eps, 0.0],
            &[1.0, 0.0, eps],
            &[1.0, -eps, eps],
        ]);
        let out = phi_potential(&x, PHI_DEFAULT_TOL).unwrap();
        assert!(out.phi < 2.0 * eps, "phi {:e}", out.phi);
        assert!(out.phi > 0.2 * eps, "phi {:e}", out.phi);
    }
}
