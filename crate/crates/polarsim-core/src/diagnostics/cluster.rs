//! Assigning a terminal state to a two-cluster arrangement.

use super::DiagnosticsError;
use crate::geometry::{distance_to_polarized, Configuration, DistanceMode, SignPattern};

/// The canonical sign pattern of the nearest polarized arrangement, provided
/// the state is within `epsilon` of the polarized set; `None` when it is not.
/// Uses the exact pattern search, so the population must be small enough for
/// enumeration.
pub fn cluster_pattern(
    x: &Configuration,
    epsilon: f64,
) -> Result<Option<SignPattern>, DiagnosticsError> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(DiagnosticsError::InvalidEpsilon { epsilon });
    }
    let nearest = distance_to_polarized(x, DistanceMode::Exact)?;
    Ok((nearest.rho <= epsilon).then_some(nearest.argmin_pattern))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::project_to_sphere;

    fn config(rows: &[&[f64]]) -> Configuration {
        Configuration::new(rows.iter().map(|r| project_to_sphere(r).unwrap()).collect()).unwrap()
    }

    #[test]
    fn polarized_state_yields_its_pattern() {
        let x = config(&[&[1.0, 0.0], &[-1.0, 0.0], &[1.0, 0.0]]);
        let pattern = cluster_pattern(&x, 1e-6).unwrap().unwrap();
        assert_eq!(pattern.signs(), &[1, -1, 1]);
    }

    #[test]
    fn pattern_is_canonical_under_global_flip() {
        let x = config(&[&[-1.0, 0.0], &[1.0, 0.0]]);
        let pattern = cluster_pattern(&x, 1e-6).unwrap().unwrap();
        // First sign pinned to +1, so the mirror image maps to the same bin.
        assert_eq!(pattern.signs(), &[1, -1]);
    }

    #[test]
    fn spread_state_is_unassigned() {
        let x = config(&[&[1.0, 0.0], &[0.0, 1.0]]);
        assert!(cluster_pattern(&x, 1e-3).unwrap().is_none());
    }

    #[test]
    fn nearly_polarized_state_is_assigned() {
        let x = config(&[&[1.0, 1e-5], &[-1.0, 1e-5]]);
        let pattern = cluster_pattern(&x, 1e-3).unwrap().unwrap();
        assert_eq!(pattern.signs(), &[1, -1]);
    }

    #[test]
    fn epsilon_must_be_positive() {
        let x = config(&[&[1.0, 0.0]]);
        assert!(cluster_pattern(&x, 0.0).is_err());
    }
}
