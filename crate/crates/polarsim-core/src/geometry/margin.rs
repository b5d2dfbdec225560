//! Margin witnesses: directions bounded away from every agent's hyperplane.

use super::{dot, haar_unit_vector, Configuration, GeometryError, UnitVector};

/// Searches for a Haar-sampled direction `z` with `|<z, x_i>| >= lambda` for
/// every agent, by rejection. Returns `None` when `max_trials` proposals all
/// fail; a valid `lambda` must lie strictly between 0 and 1.
pub fn margin_direction<R: rand::Rng + ?Sized>(
    x: &Configuration,
    lambda: f64,
    max_trials: u64,
    rng: &mut R,
) -> Result<Option<UnitVector>, GeometryError> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(GeometryError::InvalidLambda { lambda });
    }
    let d = x.dim();
    for _ in 0..max_trials {
        let z = haar_unit_vector(d, rng)?;
        if x.agents().iter().all(|a| dot(a.coords(), z.coords()).abs() >= lambda) {
            return Ok(Some(z));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::super::project_to_sphere;
    use super::*;
    use rand::SeedableRng;

    fn config(rows: &[&[f64]]) -> Configuration {
        Configuration::new(rows.iter().map(|r| project_to_sphere(r).unwrap()).collect()).unwrap()
    }

    #[test]
    fn basis_triple_admits_a_half_margin() {
        // (1,1,1)/sqrt(3) clears 0.577 on every axis, so lambda = 0.5 is easy.
        let x = config(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]);
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(2);
        let z = margin_direction(&x, 0.5, 10_000, &mut rng).unwrap().expect("witness exists");
        for a in x.agents() {
            assert!(dot(a.coords(), z.coords()).abs() >= 0.5);
        }
    }

    #[test]
    fn tight_margin_needs_more_luck_but_succeeds() {
        let x = config(&[&[1.0, 0.0]]);
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(3);
        let z = margin_direction(&x, 0.97, 1_000, &mut rng).unwrap().expect("found");
        assert!(dot(x.agent(0).coords(), z.coords()).abs() >= 0.97);
    }

    #[test]
    fn exhausted_trials_return_none() {
        let x = config(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(4);
        // No direction clears 0.99 against both basis vectors in the plane.
        assert_eq!(margin_direction(&x, 0.99, 2_000, &mut rng).unwrap(), None);
    }

    #[test]
    fn lambda_bounds_are_enforced() {
        let x = config(&[&[1.0, 0.0]]);
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(5);
        for bad in [0.0, 1.0, -0.2, 1.5] {
            assert!(matches!(
                margin_direction(&x, bad, 10, &mut rng),
                Err(GeometryError::InvalidLambda { .. })
            ));
        }
    }
}
