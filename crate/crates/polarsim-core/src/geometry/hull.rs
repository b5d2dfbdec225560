//! Convex-hull membership through the minimum-norm point.
//!
//! `min_{alpha in simplex} |sum_i alpha_i z_i|` is solved by Wolfe's
//! minimum-norm-point method: each round pulls in the vertex most aligned
//! against the current iterate, re-solves the affine minimizer over the
//! corral with a direct linear solve, and walks back onto the simplex when a
//! weight leaves it. Progress is a strict norm decrease over finitely many
//! corrals, and the final iterate is the affine minimizer of its own
//! support, so its norm is exact to rounding even when the optimum sits on a
//! degenerate low-dimensional face. The iterate norm upper-bounds the
//! minimum while `<w, z_s>/|w|` lower-bounds it, so both hull decisions
//! terminate with a certificate.

use super::{check_dim, dot, GeometryError, UnitVector, ZERO_TOL};

/// Outcome of a hull-membership query with its certificate: simplex
/// coefficients of a point within tolerance of the origin, or a direction
/// strictly separating the origin from the hull.
#[derive(Debug, Clone, PartialEq)]
pub enum HullDecision {
    Inside { coefficients: Vec<f64> },
    Outside { separator: UnitVector },
}

impl HullDecision {
    pub fn is_inside(&self) -> bool {
        matches!(self, HullDecision::Inside { .. })
    }
}

pub(crate) struct MinNormPoint {
    pub point: Vec<f64>,
    pub coefficients: Vec<f64>,
    pub norm: f64,
    pub iterations: usize,
}

/// Decides whether the origin lies within `tol` of the convex hull of
/// `points` (all of one dimension `>= 2`).
pub fn zero_in_convex_hull(
    points: &[Vec<f64>],
    tol: f64,
) -> Result<HullDecision, GeometryError> {
    if points.is_empty() {
        return Err(GeometryError::EmptyPointList);
    }
    if tol <= 0.0 {
        return Err(GeometryError::InvalidTolerance { tol });
    }
    let d = points[0].len();
    check_dim(d)?;
    for p in points {
        if p.len() != d {
            return Err(GeometryError::DimensionMismatch { expected: d, got: p.len() });
        }
        if p.iter().any(|c| !c.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
    }

    let sol = min_norm_point(points, tol, 200_000);
    if sol.norm < tol {
        Ok(HullDecision::Inside { coefficients: sol.coefficients })
    } else {
        // The negative gradient of |w|^2/2 at the final iterate, normalized.
        let separator = super::project_to_sphere(
            &sol.point.iter().map(|c| -c).collect::<Vec<f64>>(),
        )?;
        Ok(HullDecision::Outside { separator })
    }
}

// Corral weights at or below this are treated as having left the simplex.
const WEIGHT_FLOOR: f64 = 1e-12;

/// Wolfe's minimum-norm-point method over the hull of `points`.
///
/// `decision_tol` enables early exits once the membership question at that
/// tolerance is settled; pass `0.0` to run to optimality. `max_iters` is a
/// safety valve counting major and minor cycles together; the method itself
/// terminates finitely.
pub(crate) fn min_norm_point(
    points: &[Vec<f64>],
    decision_tol: f64,
    max_iters: usize,
) -> MinNormPoint {
    let m = points.len();
    let d = points[0].len();

    // Start from the shortest input point.
    let start = (0..m)
        .min_by(|&a, &b| {
            dot(&points[a], &points[a]).total_cmp(&dot(&points[b], &points[b]))
        })
        .expect("nonempty");
    let mut corral = vec![start];
    let mut lambda = vec![1.0f64];
    let mut x = points[start].clone();
    let mut lower = 0.0f64;
    let mut iterations = 0usize;
    let mut prev_norm_sq = f64::INFINITY;

    'major: while iterations < max_iters {
        iterations += 1;
        let xx = dot(&x, &x);
        // Exact arithmetic decreases the norm with every corral; a stall
        // only happens at rounding scale, where the iterate is as converged
        // as the data allows.
        if xx >= prev_norm_sq - 1e-16 * (1.0 + prev_norm_sq) {
            break;
        }
        prev_norm_sq = xx;
        let xn = xx.sqrt();

        // Most violating vertex: minimize <z, x>.
        let mut s = 0usize;
        let mut s_val = f64::INFINITY;
        for (i, p) in points.iter().enumerate() {
            let v = dot(p, &x);
            if v < s_val {
                s_val = v;
                s = i;
            }
        }
        if xn > ZERO_TOL {
            lower = lower.max(s_val / xn);
        }
        if decision_tol > 0.0 && (xn < 0.25 * decision_tol || lower >= decision_tol) {
            break;
        }
        // Optimality: no vertex lies beyond the iterate's own hyperplane.
        if s_val >= xx - 1e-14 * (1.0 + xx) {
            break;
        }
        if corral.contains(&s) {
            break;
        }
        corral.push(s);
        lambda.push(0.0);

        // Minor cycles: re-solve the affine minimizer over the corral and
        // walk the weights back onto the simplex, shedding vertices whose
        // weights vanish. Each pass removes a vertex or accepts, so this
        // loop is finite.
        loop {
            iterations += 1;
            if iterations >= max_iters {
                break 'major;
            }
            match affine_minimizer(points, &corral) {
                Some(beta) => {
                    if beta.iter().all(|&b| b > WEIGHT_FLOOR) {
                        lambda = beta;
                        break;
                    }
                    // Largest step toward the affine minimizer that keeps
                    // every weight nonnegative.
                    let mut theta = 1.0f64;
                    for (&l, &b) in lambda.iter().zip(&beta) {
                        if b < l && b <= WEIGHT_FLOOR {
                            theta = theta.min(l / (l - b));
                        }
                    }
                    for (l, &b) in lambda.iter_mut().zip(&beta) {
                        *l += theta * (b - *l);
                    }
                    let keep: Vec<usize> =
                        (0..corral.len()).filter(|&k| lambda[k] > WEIGHT_FLOOR).collect();
                    if keep.len() == corral.len() {
                        // The binding weight rounded to just above the
                        // floor; shed the smallest outright to guarantee
                        // progress.
                        let k = (0..lambda.len())
                            .min_by(|&a, &b| lambda[a].total_cmp(&lambda[b]))
                            .expect("nonempty corral");
                        corral.remove(k);
                        lambda.remove(k);
                    } else {
                        corral = keep.iter().map(|&k| corral[k]).collect();
                        lambda = keep.iter().map(|&k| lambda[k]).collect();
                    }
                    let total: f64 = lambda.iter().sum();
                    for l in lambda.iter_mut() {
                        *l /= total;
                    }
                }
                None => {
                    // Affine dependence in the corral: shed the weakest
                    // vertex and re-solve.
                    if corral.len() <= 1 {
                        break;
                    }
                    let k = (0..lambda.len())
                        .min_by(|&a, &b| lambda[a].total_cmp(&lambda[b]))
                        .expect("nonempty corral");
                    corral.remove(k);
                    lambda.remove(k);
                    let total: f64 = lambda.iter().sum();
                    if total > WEIGHT_FLOOR {
                        for l in lambda.iter_mut() {
                            *l /= total;
                        }
                    } else {
                        let even = 1.0 / lambda.len() as f64;
                        for l in lambda.iter_mut() {
                            *l = even;
                        }
                    }
                }
            }
        }
        x = combine(points, &corral, &lambda, d);
    }

    x = combine(points, &corral, &lambda, d);
    let mut coefficients = vec![0.0; m];
    for (&idx, &l) in corral.iter().zip(&lambda) {
        coefficients[idx] += l;
    }
    let norm = dot(&x, &x).sqrt();
    MinNormPoint { point: x, coefficients, norm, iterations }
}

/// Minimum-norm point of the corral's affine hull: the stationarity system
/// `[G 1; 1^T 0] [beta; mu] = [0; 1]` with `G` the corral Gram matrix.
/// `None` signals an affinely dependent corral.
fn affine_minimizer(points: &[Vec<f64>], corral: &[usize]) -> Option<Vec<f64>> {
    let k = corral.len();
    let mut a = vec![vec![0.0; k + 1]; k + 1];
    let mut scale = 0.0f64;
    for r in 0..k {
        for c in 0..k {
            let g = dot(&points[corral[r]], &points[corral[c]]);
            a[r][c] = g;
            scale = scale.max(g.abs());
        }
        a[r][k] = 1.0;
        a[k][r] = 1.0;
    }
    let mut rhs = vec![0.0; k + 1];
    rhs[k] = 1.0;
    let beta = solve_dense(&mut a, &mut rhs, 1e-13 * (1.0 + scale))?;
    Some(beta[..k].to_vec())
}

/// Gauss-Jordan with partial pivoting for the small bordered systems above.
fn solve_dense(a: &mut [Vec<f64>], rhs: &mut [f64], pivot_floor: f64) -> Option<Vec<f64>> {
    let n = rhs.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&r1, &r2| a[r1][col].abs().total_cmp(&a[r2][col].abs()))
            .expect("nonempty column range");
        if a[piv][col].abs() <= pivot_floor {
            return None;
        }
        a.swap(col, piv);
        rhs.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                if f != 0.0 {
                    for c in col..n {
                        a[r][c] -= f * a[col][c];
                    }
                    rhs[r] -= f * rhs[col];
                }
            }
        }
    }
    Some((0..n).map(|i| rhs[i] / a[i][i]).collect())
}

fn combine(points: &[Vec<f64>], corral: &[usize], lambda: &[f64], d: usize) -> Vec<f64> {
    let mut x = vec![0.0; d];
    for (&idx, &l) in corral.iter().zip(lambda) {
        for (xk, pk) in x.iter_mut().zip(&points[idx]) {
            *xk += l * pk;
        }
    }
    x
}
