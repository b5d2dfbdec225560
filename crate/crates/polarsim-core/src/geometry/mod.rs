//! Geometry of agent configurations on the unit sphere.
//!
//! Everything downstream leans on a small set of primitives: projection onto
//! the sphere, angles computed in a cancellation-free form, the distance to
//! the polarized set, the covering-cap potential, and convex-hull membership
//! certificates.

mod rho;
mod hull;
mod margin;
mod phi;

pub use hull::{zero_in_convex_hull, HullDecision};
pub use margin::margin_direction;
pub use phi::{phi_potential, PhiResult, PHI_DEFAULT_TOL};
pub use rho::{distance_to_polarized, DistanceMode, PolarizedDistance};

use std::f64::consts::PI;
use thiserror::Error;

/// Norm tolerance accepted when constructing a [`UnitVector`] directly.
pub const UNIT_NORM_TOL: f64 = 1e-9;
/// Norms below this are treated as the zero vector.
pub const ZERO_TOL: f64 = 1e-12;
/// Largest population for which the polarized distance is computed exactly.
pub const EXACT_PATTERN_LIMIT: usize = 24;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("vector norm {norm:.3e} is below the zero threshold {ZERO_TOL:.0e}")]
    ZeroVector { norm: f64 },
    #[error("vector norm {norm} is not within {UNIT_NORM_TOL:.0e} of 1")]
    NotUnit { norm: f64 },
    #[error("vectors live on different spheres: dimensions {expected} and {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("ambient dimension must be at least 2, got {dim}")]
    DimensionTooSmall { dim: usize },
    #[error("a configuration needs at least one agent")]
    EmptyConfiguration,
    #[error("coordinates must be finite")]
    NonFinite,
    #[error("exact polarized distance supports at most {limit} agents, got {n}")]
    ExactTooLarge { n: usize, limit: usize },
    #[error("configuration contains an (up to tolerance) antipodal pair, the cap potential is undefined")]
    DegenerateInput,
    #[error("margin level must lie strictly between 0 and 1, got {lambda}")]
    InvalidLambda { lambda: f64 },
    #[error("tolerance must be positive, got {tol}")]
    InvalidTolerance { tol: f64 },
    #[error("sign patterns use entries +1/-1 only, got {value} at index {index}")]
    InvalidSign { value: i8, index: usize },
    #[error("operation needs a nonempty point list")]
    EmptyPointList,
}

/// A point on the unit sphere `S^{d-1}`, `d >= 2`, with norm within
/// [`UNIT_NORM_TOL`] of one.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitVector {
    coords: Vec<f64>,
}

impl UnitVector {
    /// Accepts coordinates that already satisfy the norm invariant.
    pub fn new(coords: Vec<f64>) -> Result<Self, GeometryError> {
        check_dim(coords.len())?;
        check_finite(&coords)?;
        let norm = norm(&coords);
        if (norm - 1.0).abs() > UNIT_NORM_TOL {
            return Err(GeometryError::NotUnit { norm });
        }
        Ok(Self { coords })
    }

    /// Standard basis vector `e_axis` in dimension `d`.
    pub fn basis(d: usize, axis: usize) -> Result<Self, GeometryError> {
        check_dim(d)?;
        if axis >= d {
            return Err(GeometryError::DimensionMismatch { expected: d, got: axis });
        }
        let mut coords = vec![0.0; d];
        coords[axis] = 1.0;
        Ok(Self { coords })
    }

    /// Caller guarantees the coordinates are normalized.
    pub(crate) fn from_normalized(coords: Vec<f64>) -> Self {
        debug_assert!(coords.len() >= 2);
        debug_assert!((norm(&coords) - 1.0).abs() <= 1e-7);
        Self { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// The antipode `-x`; flipping every coordinate is exact in IEEE terms.
    pub fn negated(&self) -> Self {
        Self { coords: self.coords.iter().map(|c| -c).collect() }
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }
}

/// A population of agents sharing one sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    agents: Vec<UnitVector>,
}

impl Configuration {
    pub fn new(agents: Vec<UnitVector>) -> Result<Self, GeometryError> {
        let first = agents.first().ok_or(GeometryError::EmptyConfiguration)?;
        let d = first.dim();
        for a in &agents {
            if a.dim() != d {
                return Err(GeometryError::DimensionMismatch { expected: d, got: a.dim() });
            }
        }
        Ok(Self { agents })
    }

    pub fn n(&self) -> usize {
        self.agents.len()
    }

    pub fn dim(&self) -> usize {
        self.agents[0].dim()
    }

    pub fn agents(&self) -> &[UnitVector] {
        &self.agents
    }

    pub fn agent(&self, i: usize) -> &UnitVector {
        &self.agents[i]
    }

    /// Row-major copy of all coordinates, used by the stepping kernels.
    pub(crate) fn to_flat(&self) -> Vec<f64> {
        let mut flat = Vec::with_capacity(self.n() * self.dim());
        for a in &self.agents {
            flat.extend_from_slice(a.coords());
        }
        flat
    }

    /// Rebuilds a configuration from a row-major buffer of normalized rows.
    pub(crate) fn from_flat(flat: &[f64], n: usize, d: usize) -> Self {
        debug_assert_eq!(flat.len(), n * d);
        let agents = (0..n)
            .map(|i| UnitVector::from_normalized(flat[i * d..(i + 1) * d].to_vec()))
            .collect();
        Self { agents }
    }
}

/// Signs `sigma_i in {-1, +1}` assigning each agent to a camp. Canonical
/// patterns pin the first sign to `+1`, which quotients out the global flip.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SignPattern {
    signs: Vec<i8>,
}

impl SignPattern {
    /// Validates entries and flips globally so the first sign is `+1`.
    pub fn canonical(signs: Vec<i8>) -> Result<Self, GeometryError> {
        if signs.is_empty() {
            return Err(GeometryError::EmptyConfiguration);
        }
        for (index, &value) in signs.iter().enumerate() {
            if value != 1 && value != -1 {
                return Err(GeometryError::InvalidSign { value, index });
            }
        }
        let flip = signs[0] == -1;
        let signs = if flip { signs.iter().map(|s| -s).collect() } else { signs };
        Ok(Self { signs })
    }

    pub fn len(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn sign(&self, i: usize) -> i8 {
        self.signs[i]
    }

    /// Canonical patterns on `n` agents enumerate as `0..2^(n-1)`; bit `i-1`
    /// set means agent `i` carries `-1`.
    pub fn index(&self) -> u64 {
        let mut idx = 0u64;
        for (i, &s) in self.signs.iter().enumerate().skip(1) {
            if s == -1 {
                idx |= 1 << (i - 1);
            }
        }
        idx
    }

    pub fn from_index(n: usize, index: u64) -> Result<Self, GeometryError> {
        if n == 0 || (n <= 64 && index >= (1u64 << (n - 1)).max(1)) {
            return Err(GeometryError::EmptyConfiguration);
        }
        let mut signs = vec![1i8; n];
        for (i, s) in signs.iter_mut().enumerate().skip(1) {
            if index >> (i - 1) & 1 == 1 {
                *s = -1;
            }
        }
        Ok(Self { signs })
    }

    /// Applies the signs agentwise: agent `i` becomes `sigma_i * x_i`.
    pub fn apply(&self, x: &Configuration) -> Result<Configuration, GeometryError> {
        if self.len() != x.n() {
            return Err(GeometryError::DimensionMismatch { expected: x.n(), got: self.len() });
        }
        let agents = x
            .agents()
            .iter()
            .zip(&self.signs)
            .map(|(a, &s)| if s == 1 { a.clone() } else { a.negated() })
            .collect();
        Ok(Configuration { agents })
    }
}

pub(crate) fn check_dim(d: usize) -> Result<(), GeometryError> {
    if d < 2 {
        return Err(GeometryError::DimensionTooSmall { dim: d });
    }
    Ok(())
}

fn check_finite(coords: &[f64]) -> Result<(), GeometryError> {
    if coords.iter().any(|c| !c.is_finite()) {
        return Err(GeometryError::NonFinite);
    }
    Ok(())
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Normalizes `v` onto the sphere. Rejects vectors of norm below
/// [`ZERO_TOL`], where the direction carries no information.
pub fn project_to_sphere(v: &[f64]) -> Result<UnitVector, GeometryError> {
    check_dim(v.len())?;
    check_finite(v)?;
    let norm = norm(v);
    if norm < ZERO_TOL {
        return Err(GeometryError::ZeroVector { norm });
    }
    Ok(UnitVector::from_normalized(v.iter().map(|c| c / norm).collect()))
}

/// Geodesic angle between two unit vectors, in `[0, pi]`.
///
/// Evaluated through chord lengths (`2 asin(|u - v|/2)` and its antipodal
/// mirror) rather than `acos` of the inner product, which loses all precision
/// for nearly parallel vectors.
pub fn angle(u: &UnitVector, v: &UnitVector) -> Result<f64, GeometryError> {
    if u.dim() != v.dim() {
        return Err(GeometryError::DimensionMismatch { expected: u.dim(), got: v.dim() });
    }
    Ok(angle_normalized(u.coords(), v.coords()))
}

/// Angle between two already-normalized coordinate slices.
pub(crate) fn angle_normalized(a: &[f64], b: &[f64]) -> f64 {
    let mut diff = 0.0;
    let mut sum = 0.0;
    for (x, y) in a.iter().zip(b) {
        diff += (x - y) * (x - y);
        sum += (x + y) * (x + y);
    }
    // diff <= sum exactly when the inner product is nonnegative.
    if diff <= sum {
        2.0 * (0.5 * diff.sqrt()).clamp(0.0, 1.0).asin()
    } else {
        PI - 2.0 * (0.5 * sum.sqrt()).clamp(0.0, 1.0).asin()
    }
}

/// Largest pairwise angle in the configuration; zero for a single agent.
pub fn max_pairwise_angle(x: &Configuration) -> f64 {
    let agents = x.agents();
    let mut max = 0.0f64;
    for i in 0..agents.len() {
        for j in i + 1..agents.len() {
            max = max.max(angle_normalized(agents[i].coords(), agents[j].coords()));
        }
    }
    max
}

/// Greedily signs each agent so it does not oppose the running sum, then
/// reports the canonical pattern together with the flipped configuration.
///
/// The first agent keeps its orientation; agent `i` is flipped exactly when
/// its inner product with the sum of the already-aligned agents is negative,
/// so every aligned agent satisfies `<sigma_i x_i, sum_before_i> >= 0`.
pub fn canonical_sign_alignment(x: &Configuration) -> (SignPattern, Configuration) {
    let d = x.dim();
    let mut signs = vec![1i8; x.n()];
    let mut running = x.agent(0).coords().to_vec();
    for i in 1..x.n() {
        let a = x.agent(i).coords();
        if dot(a, &running) < 0.0 {
            signs[i] = -1;
        }
        let s = f64::from(signs[i]);
        for k in 0..d {
            running[k] += s * a[k];
        }
    }
    let pattern = SignPattern { signs };
    let aligned = pattern.apply(x).expect("pattern built for this configuration");
    (pattern, aligned)
}

/// Samples a Haar-uniform point on `S^{d-1}` as a normalized Gaussian.
pub fn haar_unit_vector<R: rand::Rng + ?Sized>(
    d: usize,
    rng: &mut R,
) -> Result<UnitVector, GeometryError> {
    check_dim(d)?;
    loop {
        let v: Vec<f64> =
            (0..d).map(|_| rand_distr::StandardNormal.sample(rng)).collect::<Vec<f64>>();
        // A zero draw has probability zero; resampling keeps the law Haar.
        if let Ok(u) = project_to_sphere(&v) {
            return Ok(u);
        }
    }
}

use rand_distr::Distribution;

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(coords: &[f64]) -> UnitVector {
        project_to_sphere(coords).unwrap()
    }

    #[test]
    fn project_scales_to_unit_norm() {
        let u = project_to_sphere(&[3.0, 4.0]).unwrap();
        assert_eq!(u.coords(), &[0.6, 0.8]);
    }

    #[test]
    fn project_rejects_near_zero() {
        let err = project_to_sphere(&[1e-13, 0.0]).unwrap_err();
        assert!(matches!(err, GeometryError::ZeroVector { .. }));
    }

    #[test]
    fn project_preserves_unit_vectors() {
        let u = project_to_sphere(&[0.0, 1.0, 0.0]).unwrap();
        assert_eq!(u.coords(), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn project_rejects_non_finite() {
        assert!(matches!(
            project_to_sphere(&[f64::NAN, 1.0]),
            Err(GeometryError::NonFinite)
        ));
    }

    #[test]
    fn unit_vector_demands_dimension_two() {
        assert!(matches!(
            UnitVector::new(vec![1.0]),
            Err(GeometryError::DimensionTooSmall { dim: 1 })
        ));
    }

    #[test]
    fn angle_of_orthogonal_pair_is_right() {
        let a = angle(&unit(&[1.0, 0.0]), &unit(&[0.0, 1.0])).unwrap();
        assert!((a - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn angle_of_antipodal_pair_is_pi() {
        let a = angle(&unit(&[1.0, 0.0]), &unit(&[-1.0, 0.0])).unwrap();
        assert!((a - PI).abs() < 1e-15);
    }

    #[test]
    fn angle_clamps_rounding_noise_to_zero() {
        let u = unit(&[0.6, 0.8, 0.0]);
        let a = angle(&u, &u.clone()).unwrap();
        assert_eq!(a, 0.0);
    }

    #[test]
    fn angle_is_accurate_for_tiny_separations() {
        let eps = 1e-9;
        let u = unit(&[1.0, 0.0]);
        let v = unit(&[(1.0f64 - eps * eps / 2.0), eps]);
        let a = angle(&u, &v).unwrap();
        assert!((a - eps).abs() < 1e-15, "angle {a:e} should be ~{eps:e}");
    }

    #[test]
    fn angle_rejects_mixed_dimensions() {
        let u = unit(&[1.0, 0.0]);
        let v = unit(&[1.0, 0.0, 0.0]);
        assert!(matches!(angle(&u, &v), Err(GeometryError::DimensionMismatch { .. })));
    }

    #[test]
    fn max_pairwise_angle_on_singleton_is_zero() {
        let x = Configuration::new(vec![unit(&[1.0, 0.0])]).unwrap();
        assert_eq!(max_pairwise_angle(&x), 0.0);
    }

    #[test]
    fn max_pairwise_angle_equilateral_basis() {
        let x = Configuration::new(vec![
            unit(&[1.0, 0.0, 0.0]),
            unit(&[0.0, 1.0, 0.0]),
            unit(&[0.0, 0.0, 1.0]),
        ])
        .unwrap();
        assert!((max_pairwise_angle(&x) - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn alignment_flips_the_nearly_antipodal_agent() {
        let delta = 1e-3;
        let x = Configuration::new(vec![
            unit(&[1.0, 0.0]),
            project_to_sphere(&[-1.0, delta]).unwrap(),
        ])
        .unwrap();
        let (pattern, aligned) = canonical_sign_alignment(&x);
        assert_eq!(pattern.signs(), &[1, -1]);
        assert!(aligned.agent(1).coords()[0] > 0.99);
    }

    #[test]
    fn alignment_keeps_identical_agents() {
        let u = unit(&[0.6, 0.8]);
        let x = Configuration::new(vec![u.clone(), u.clone()]).unwrap();
        let (pattern, _) = canonical_sign_alignment(&x);
        assert_eq!(pattern.signs(), &[1, 1]);
    }

    #[test]
    fn alignment_orthogonal_tie_keeps_plus() {
        // Zero inner product counts as agreement, so no flip.
        let x = Configuration::new(vec![unit(&[1.0, 0.0]), unit(&[0.0, 1.0])]).unwrap();
        let (pattern, _) = canonical_sign_alignment(&x);
        assert_eq!(pattern.signs(), &[1, 1]);
    }

    #[test]
    fn canonical_pattern_flips_global_sign() {
        let p = SignPattern::canonical(vec![-1, 1, -1]).unwrap();
        assert_eq!(p.signs(), &[1, -1, 1]);
        assert_eq!(p.index(), 0b01);
    }

    #[test]
    fn pattern_index_round_trip() {
        for idx in 0..8 {
            let p = SignPattern::from_index(4, idx).unwrap();
            assert_eq!(p.index(), idx);
            assert_eq!(p.sign(0), 1);
        }
    }

    #[test]
    fn pattern_rejects_zero_entries() {
        assert!(matches!(
            SignPattern::canonical(vec![1, 0]),
            Err(GeometryError::InvalidSign { value: 0, index: 1 })
        ));
    }

    #[test]
    fn haar_samples_are_unit_and_seeded() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(7);
        let u = haar_unit_vector(5, &mut rng).unwrap();
        assert_eq!(u.dim(), 5);
        assert!((norm(u.coords()) - 1.0).abs() < 1e-12);
        let mut rng2 = rand_chacha::ChaCha12Rng::seed_from_u64(7);
        let v = haar_unit_vector(5, &mut rng2).unwrap();
        assert_eq!(u, v);
    }
}
