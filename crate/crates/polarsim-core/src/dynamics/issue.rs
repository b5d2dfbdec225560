//! Issue distributions: where each step's issue vector comes from.

use super::DynamicsError;
use crate::geometry::{haar_unit_vector, GeometryError, UnitVector};
use rand::Rng;
use std::fmt;
use std::sync::Arc;

/// Attempt budget for rejection sampling before reporting a stall.
const REJECTION_BUDGET: u64 = 1_000_000;

/// Density with respect to the uniform measure on the sphere, bounded between
/// `lower` and `upper`. Sampled by rejection against the uniform proposal, so
/// the expected number of proposals per draw is `upper` (the density need not
/// be normalized; only the ratio to `upper` matters).
type Density = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct TiltedHaar {
    density: Density,
    lower: f64,
    upper: f64,
}

impl TiltedHaar {
    pub fn new<F>(lower: f64, upper: f64, density: F) -> Result<Self, DynamicsError>
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        if !(lower.is_finite() && upper.is_finite() && 0.0 < lower && lower <= upper) {
            return Err(DynamicsError::InvalidDensityBounds { lower, upper });
        }
        Ok(Self { density: Arc::new(density), lower, upper })
    }

    pub fn density(&self, xi: &[f64]) -> f64 {
        (self.density)(xi)
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.lower, self.upper)
    }
}

impl fmt::Debug for TiltedHaar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TiltedHaar")
            .field("lower", &self.lower)
            .field("upper", &self.upper)
            .finish_non_exhaustive()
    }
}

/// Finitely many issue directions with fixed probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteSupport {
    atoms: Vec<UnitVector>,
    probs: Vec<f64>,
    cumulative: Vec<f64>,
}

impl FiniteSupport {
    pub fn new(atoms: Vec<UnitVector>, probs: Vec<f64>) -> Result<Self, DynamicsError> {
        if atoms.is_empty() {
            return Err(GeometryError::EmptyConfiguration.into());
        }
        let d = atoms[0].dim();
        for atom in &atoms {
            if atom.dim() != d {
                return Err(GeometryError::DimensionMismatch { expected: d, got: atom.dim() }.into());
            }
        }
        if probs.len() != atoms.len() {
            return Err(GeometryError::DimensionMismatch { expected: atoms.len(), got: probs.len() }
                .into());
        }
        let sum: f64 = probs.iter().sum();
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) || (sum - 1.0).abs() > 1e-12 {
            return Err(DynamicsError::InvalidProbabilities { sum });
        }
        let mut cumulative = Vec::with_capacity(probs.len());
        let mut acc = 0.0;
        for p in &probs {
            acc += p;
            cumulative.push(acc);
        }
        // Guard the last bucket against rounding in the partial sums.
        *cumulative.last_mut().expect("nonempty") = f64::INFINITY;
        Ok(Self { atoms, probs, cumulative })
    }

    /// The standard basis directions, each with probability `1/d`.
    pub fn orthonormal_basis(d: usize) -> Result<Self, DynamicsError> {
        let atoms = (0..d).map(|axis| UnitVector::basis(d, axis)).collect::<Result<_, _>>()?;
        Self::new(atoms, vec![1.0 / d as f64; d])
    }

    pub fn atoms(&self) -> &[UnitVector] {
        &self.atoms
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }
}

#[derive(Debug, Clone)]
pub enum IssueDistribution {
    /// Uniform on the unit sphere.
    HaarUniform,
    /// Bounded density against the uniform measure.
    TiltedHaar(TiltedHaar),
    /// Finitely many directions.
    FiniteSupport(FiniteSupport),
}

impl IssueDistribution {
    /// The dimension the distribution insists on, if any.
    pub fn dim_constraint(&self) -> Option<usize> {
        match self {
            IssueDistribution::HaarUniform | IssueDistribution::TiltedHaar(_) => None,
            IssueDistribution::FiniteSupport(fs) => Some(fs.atoms[0].dim()),
        }
    }
}

/// Draws one issue in dimension `d`.
pub fn sample_issue<R: Rng + ?Sized>(
    dist: &IssueDistribution,
    d: usize,
    rng: &mut R,
) -> Result<UnitVector, DynamicsError> {
    if let Some(required) = dist.dim_constraint() {
        if required != d {
            return Err(DynamicsError::WrongIssueDimension { expected: required, got: d });
        }
    }
    match dist {
        IssueDistribution::HaarUniform => Ok(haar_unit_vector(d, rng)?),
        IssueDistribution::TiltedHaar(tilt) => {
            for _ in 0..REJECTION_BUDGET {
                let proposal = haar_unit_vector(d, rng)?;
                let value = tilt.density(proposal.coords());
                if !value.is_finite()
                    || value < tilt.lower - 1e-12
                    || value > tilt.upper + 1e-12
                {
                    return Err(DynamicsError::DensityOutOfBounds {
                        value,
                        lower: tilt.lower,
                        upper: tilt.upper,
                    });
                }
                if rng.random::<f64>() * tilt.upper < value {
                    return Ok(proposal);
                }
            }
            Err(DynamicsError::RejectionStall { proposals: REJECTION_BUDGET })
        }
        IssueDistribution::FiniteSupport(fs) => {
            let u = rng.random::<f64>();
            let index = fs.cumulative.partition_point(|c| *c <= u);
            Ok(fs.atoms[index.min(fs.atoms.len() - 1)].clone())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    #[test]
    fn finite_support_frequencies_match_probabilities() {
        let fs = FiniteSupport::orthonormal_basis(3).unwrap();
        let dist = IssueDistribution::FiniteSupport(fs);
        let mut rng = RngStream::new(7, 0);
        let mut counts = [0u32; 3];
        for _ in 0..30_000 {
            let xi = sample_issue(&dist, 3, &mut rng).unwrap();
            let axis = xi.coords().iter().position(|c| *c == 1.0).unwrap();
            counts[axis] += 1;
        }
        for c in counts {
            // Binomial(30000, 1/3): five sigmas is about 400.
            assert!((f64::from(c) - 10_000.0).abs() < 450.0, "counts {counts:?}");
        }
    }

    #[test]
    fn finite_support_rejects_bad_probabilities() {
        let atoms = vec![UnitVector::basis(2, 0).unwrap(), UnitVector::basis(2, 1).unwrap()];
        assert!(matches!(
            FiniteSupport::new(atoms.clone(), vec![0.7, 0.7]),
            Err(DynamicsError::InvalidProbabilities { .. })
        ));
        assert!(matches!(
            FiniteSupport::new(atoms, vec![1.2, -0.2]),
            Err(DynamicsError::InvalidProbabilities { .. })
        ));
    }

    #[test]
    fn tilted_haar_shifts_mass_toward_the_axis() {
        // Density 1 + a <xi, e1> with a = 0.8: mass moves to <xi, e1> > 0.
        let axis = [1.0, 0.0, 0.0];
        let tilt = TiltedHaar::new(0.2, 1.8, move |xi: &[f64]| {
            1.0 + 0.8 * crate::geometry::dot(xi, &axis)
        })
        .unwrap();
        let dist = IssueDistribution::TiltedHaar(tilt);
        let mut rng = RngStream::new(11, 0);
        let mut mean = 0.0;
        let draws = 40_000;
        for _ in 0..draws {
            mean += sample_issue(&dist, 3, &mut rng).unwrap().coords()[0];
        }
        mean /= f64::from(draws);
        // E[<xi, e1>] = a E[c^2] = a/d for density 1 + a c on the sphere.
        assert!((mean - 0.8 / 3.0).abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn tilted_haar_validates_bounds() {
        assert!(matches!(
            TiltedHaar::new(0.0, 1.0, |_: &[f64]| 1.0),
            Err(DynamicsError::InvalidDensityBounds { .. })
        ));
        assert!(matches!(
            TiltedHaar::new(1.5, 1.0, |_: &[f64]| 1.0),
            Err(DynamicsError::InvalidDensityBounds { .. })
        ));
    }

    #[test]
    fn density_outside_declared_bounds_is_an_error() {
        let tilt = TiltedHaar::new(0.5, 1.0, |xi: &[f64]| 1.0 + xi[0].abs()).unwrap();
        let dist = IssueDistribution::TiltedHaar(tilt);
        let mut rng = RngStream::new(3, 0);
        let err = sample_issue(&dist, 3, &mut rng).unwrap_err();
        assert!(matches!(err, DynamicsError::DensityOutOfBounds { .. }));
    }

    #[test]
    fn finite_support_pins_the_dimension() {
        let fs = FiniteSupport::orthonormal_basis(4).unwrap();
        let dist = IssueDistribution::FiniteSupport(fs);
        let mut rng = RngStream::new(5, 0);
        assert!(matches!(
            sample_issue(&dist, 3, &mut rng),
            Err(DynamicsError::WrongIssueDimension { expected: 4, got: 3 })
        ));
    }
}
