//! Experiment configuration: the single structured text file that describes
//! a run, plus its translation into core types.
//!
//! Configs are TOML on disk. The round-trip `parse(serialize(c)) == c` holds
//! exactly for every valid config, so a manifest echo can always be replayed.
//! Scalar fields sit before the `model`/`distribution`/`init` tables because
//! TOML insists plain values precede tables.

use crate::HarnessError;
use polarsim_core::dynamics::{
    default_record_every, FiniteSupport, InfluenceMatrix, IssueDistribution, ModelSpec,
    SimOptions, TiltedHaar,
};
use polarsim_core::geometry::{project_to_sphere, DistanceMode, PHI_DEFAULT_TOL};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Population size above which the automatic rho mode switches from the
/// exact pattern enumeration to the flip-refinement heuristic.
pub const AUTO_EXACT_LIMIT: usize = 12;

/// One experiment: model, issue source, starting law, horizon, and replica
/// plan. `record_every = None` picks the default cadence that caps a series
/// at roughly ten thousand rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub n: usize,
    pub d: usize,
    pub steps: u64,
    pub replicas: u64,
    pub master_seed: u64,
    #[serde(default = "default_epsilon_grid")]
    pub epsilon_grid: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub record_every: Option<u64>,
    #[serde(default = "default_tail_fraction")]
    pub tail_fraction: f64,
    #[serde(default = "default_outputs")]
    pub outputs: String,
    /// Spread-potential cadence on recorded rows; 0 disables it.
    #[serde(default)]
    pub phi_every: u64,
    #[serde(default)]
    pub rho_mode: RhoMode,
    pub model: ModelConfig,
    pub distribution: DistributionConfig,
    pub init: InitConfig,
}

fn default_epsilon_grid() -> Vec<f64> {
    vec![0.01]
}

fn default_tail_fraction() -> f64 {
    0.2
}

fn default_outputs() -> String {
    "out".to_string()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RhoMode {
    /// Exact up to [`AUTO_EXACT_LIMIT`] agents, heuristic beyond.
    #[default]
    Auto,
    Exact,
    Heuristic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelConfig {
    Correlation { eta: f64 },
    Signed { eta: f64 },
    /// Influence weights as an `n x n` row-major table; row `i` lists the
    /// pull of each agent on agent `i`.
    Party { weights: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistributionConfig {
    /// Uniform on the sphere.
    Haar,
    /// Density `1 + amplitude * xi[axis]` against the uniform measure,
    /// bounded in `[1 - amplitude, 1 + amplitude]`.
    CosineTilt { axis: usize, amplitude: f64 },
    /// The standard basis directions, each with probability `1/d`.
    OrthonormalBasis,
    /// Explicit atoms with probabilities; atoms are normalized on load.
    Finite { atoms: Vec<Vec<f64>>, probs: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitConfig {
    /// Independent Haar draws for every agent.
    HaarRandom,
    /// Fixed starting vectors, shared by all replicas. Inputs are normalized
    /// on load; the manifest flags whether that changed anything.
    Explicit { vectors: Vec<Vec<f64>> },
    /// A random polarized state: one Haar direction, independent signs.
    Polarized,
    /// One random coordinate support of size at least two, Haar on that
    /// subsphere per agent, resampled until no two agents are sign-equal up
    /// to a global flip.
    EqualSupportRandom,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, HarnessError> {
        let config: Self = toml::from_str(text)
            .map_err(|e| HarnessError::config("config", e.message().to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml_string(&self) -> Result<String, HarnessError> {
        toml::to_string(self).map_err(|e| HarnessError::config("config", e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.n == 0 {
            return Err(HarnessError::config("n", "population must be at least 1"));
        }
        if self.d == 0 {
            return Err(HarnessError::config("d", "dimension must be at least 1"));
        }
        if self.replicas == 0 {
            return Err(HarnessError::config("replicas", "at least one replica is required"));
        }
        // TOML integers are signed 64-bit, and every valid config must
        // survive the serialize/parse round trip.
        if self.master_seed > i64::MAX as u64 {
            return Err(HarnessError::config(
                "master_seed",
                format!("seeds above {} are not representable in a config file", i64::MAX),
            ));
        }
        if self.epsilon_grid.is_empty() {
            return Err(HarnessError::config("epsilon_grid", "at least one epsilon is required"));
        }
        for &eps in &self.epsilon_grid {
            if !(eps.is_finite() && eps > 0.0) {
                return Err(HarnessError::config(
                    "epsilon_grid",
                    format!("epsilons must be positive and finite, got {eps}"),
                ));
            }
        }
        if self.record_every == Some(0) {
            return Err(HarnessError::config("record_every", "cadence must be at least 1"));
        }
        if !(self.tail_fraction > 0.0 && self.tail_fraction <= 1.0) {
            return Err(HarnessError::config(
                "tail_fraction",
                format!("must lie in (0, 1], got {}", self.tail_fraction),
            ));
        }
        match &self.model {
            ModelConfig::Correlation { eta } | ModelConfig::Signed { eta } => {
                if !(eta.is_finite() && *eta > 0.0) {
                    return Err(HarnessError::config(
                        "model.eta",
                        format!("must be positive and finite, got {eta}"),
                    ));
                }
            }
            ModelConfig::Party { weights } => {
                if weights.len() != self.n {
                    return Err(HarnessError::config(
                        "model.weights",
                        format!("need {} rows, got {}", self.n, weights.len()),
                    ));
                }
                InfluenceMatrix::new(weights.clone())
                    .map_err(|e| HarnessError::config("model.weights", e.to_string()))?;
            }
        }
        match &self.distribution {
            DistributionConfig::Haar | DistributionConfig::OrthonormalBasis => {}
            DistributionConfig::CosineTilt { axis, amplitude } => {
                if *axis >= self.d {
                    return Err(HarnessError::config(
                        "distribution.axis",
                        format!("axis {axis} outside dimension {}", self.d),
                    ));
                }
                if !(amplitude.is_finite() && *amplitude > 0.0 && *amplitude < 1.0) {
                    return Err(HarnessError::config(
                        "distribution.amplitude",
                        format!("must lie in (0, 1) so the density stays positive, got {amplitude}"),
                    ));
                }
            }
            DistributionConfig::Finite { atoms, probs } => {
                if atoms.is_empty() {
                    return Err(HarnessError::config(
                        "distribution.atoms",
                        "at least one atom is required",
                    ));
                }
                for (i, atom) in atoms.iter().enumerate() {
                    if atom.len() != self.d {
                        return Err(HarnessError::config(
                            "distribution.atoms",
                            format!("atom {i} has {} coordinates, expected {}", atom.len(), self.d),
                        ));
                    }
                    project_to_sphere(atom).map_err(|e| {
                        HarnessError::config("distribution.atoms", format!("atom {i}: {e}"))
                    })?;
                }
                if probs.len() != atoms.len() {
                    return Err(HarnessError::config(
                        "distribution.probs",
                        format!("{} probabilities for {} atoms", probs.len(), atoms.len()),
                    ));
                }
            }
        }
        match &self.init {
            InitConfig::HaarRandom | InitConfig::Polarized => {}
            InitConfig::Explicit { vectors } => {
                if vectors.len() != self.n {
                    return Err(HarnessError::config(
                        "init.vectors",
                        format!("need {} vectors, got {}", self.n, vectors.len()),
                    ));
                }
                for (i, v) in vectors.iter().enumerate() {
                    if v.len() != self.d {
                        return Err(HarnessError::config(
                            "init.vectors",
                            format!("vector {i} has {} coordinates, expected {}", v.len(), self.d),
                        ));
                    }
                    project_to_sphere(v).map_err(|e| {
                        HarnessError::config("init.vectors", format!("vector {i}: {e}"))
                    })?;
                }
            }
            InitConfig::EqualSupportRandom => {
                if self.d < 2 {
                    return Err(HarnessError::config(
                        "init",
                        "equal_support_random needs dimension at least 2",
                    ));
                }
                // Up to a global flip there are 2^(k-1) sign classes on a
                // size-k support, so this bound is what makes the pairwise
                // rejection terminate even at the full support.
                if self.d > 63 || (self.n as u128) > (1u128 << (self.d - 1)) {
                    return Err(HarnessError::config(
                        "init",
                        format!(
                            "equal_support_random cannot seat {} sign-distinct agents in dimension {}",
                            self.n, self.d
                        ),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn to_model(&self) -> Result<ModelSpec, HarnessError> {
        match &self.model {
            ModelConfig::Correlation { eta } => Ok(ModelSpec::Correlation { eta: *eta }),
            ModelConfig::Signed { eta } => Ok(ModelSpec::Signed { eta: *eta }),
            ModelConfig::Party { weights } => {
                let influence = InfluenceMatrix::new(weights.clone())
                    .map_err(|e| HarnessError::config("model.weights", e.to_string()))?;
                Ok(ModelSpec::Party { influence })
            }
        }
    }

    pub fn to_distribution(&self) -> Result<IssueDistribution, HarnessError> {
        match &self.distribution {
            DistributionConfig::Haar => Ok(IssueDistribution::HaarUniform),
            DistributionConfig::CosineTilt { axis, amplitude } => {
                let (axis, a) = (*axis, *amplitude);
                let tilted = TiltedHaar::new(1.0 - a, 1.0 + a, move |xi: &[f64]| 1.0 + a * xi[axis])
                    .map_err(|e| HarnessError::config("distribution", e.to_string()))?;
                Ok(IssueDistribution::TiltedHaar(tilted))
            }
            DistributionConfig::OrthonormalBasis => {
                let support = FiniteSupport::orthonormal_basis(self.d)
                    .map_err(|e| HarnessError::config("distribution", e.to_string()))?;
                Ok(IssueDistribution::FiniteSupport(support))
            }
            DistributionConfig::Finite { atoms, probs } => {
                let unit_atoms = atoms
                    .iter()
                    .map(|a| project_to_sphere(a))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| HarnessError::config("distribution.atoms", e.to_string()))?;
                let support = FiniteSupport::new(unit_atoms, probs.clone())
                    .map_err(|e| HarnessError::config("distribution.probs", e.to_string()))?;
                Ok(IssueDistribution::FiniteSupport(support))
            }
        }
    }

    /// Recording cadence after applying the default rule.
    pub fn effective_record_every(&self) -> u64 {
        self.record_every.unwrap_or_else(|| default_record_every(self.steps))
    }

    pub fn sim_options(&self) -> SimOptions {
        let rho_mode = match self.rho_mode {
            RhoMode::Auto => {
                if self.n <= AUTO_EXACT_LIMIT {
                    DistanceMode::Exact
                } else {
                    DistanceMode::Heuristic
                }
            }
            RhoMode::Exact => DistanceMode::Exact,
            RhoMode::Heuristic => DistanceMode::Heuristic,
        };
        SimOptions {
            record_every: self.effective_record_every(),
            rho_mode,
            phi_every: self.phi_every,
            phi_tol: PHI_DEFAULT_TOL,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use polarsim_core::rng::RngStream;
    use rand::Rng;

    fn base() -> ExperimentConfig {
        ExperimentConfig {
            name: "smoke".to_string(),
            n: 3,
            d: 3,
            steps: 10,
            replicas: 2,
            master_seed: 7,
            epsilon_grid: vec![0.01],
            record_every: None,
            tail_fraction: 0.2,
            outputs: "out".to_string(),
            phi_every: 0,
            rho_mode: RhoMode::Auto,
            model: ModelConfig::Signed { eta: 0.1 },
            distribution: DistributionConfig::Haar,
            init: InitConfig::HaarRandom,
        }
    }

    fn random_config(rng: &mut RngStream) -> ExperimentConfig {
        let n = rng.random_range(1..5usize);
        let d = rng.random_range(2..5usize);
        let model = match rng.random_range(0..3u8) {
            0 => ModelConfig::Correlation { eta: rng.random::<f64>() + 0.05 },
            1 => ModelConfig::Signed { eta: rng.random::<f64>() + 0.05 },
            _ => ModelConfig::Party {
                weights: (0..n)
                    .map(|i| (0..n).map(|j| if i == j { 1.0 } else { rng.random::<f64>() }).collect())
                    .collect(),
            },
        };
        let distribution = match rng.random_range(0..4u8) {
            0 => DistributionConfig::Haar,
            1 => DistributionConfig::CosineTilt {
                axis: rng.random_range(0..d),
                amplitude: 0.1 + 0.8 * rng.random::<f64>(),
            },
            2 => DistributionConfig::OrthonormalBasis,
            _ => {
                let atoms: Vec<Vec<f64>> = (0..rng.random_range(1..4usize))
                    .map(|_| (0..d).map(|_| rng.random::<f64>() + 0.1).collect())
                    .collect();
                let raw: Vec<f64> = (0..atoms.len()).map(|_| rng.random::<f64>() + 0.1).collect();
                let sum: f64 = raw.iter().sum();
                DistributionConfig::Finite {
                    atoms,
                    probs: raw.iter().map(|p| p / sum).collect(),
                }
            }
        };
        let init = match rng.random_range(0..4u8) {
            0 => InitConfig::HaarRandom,
            1 => InitConfig::Explicit {
                vectors: (0..n).map(|_| (0..d).map(|_| rng.random::<f64>() + 0.1).collect()).collect(),
            },
            2 => InitConfig::Polarized,
            // Equal-support starts need enough sign classes: n <= 2^(d-1).
            _ if n <= 1 << (d - 1) => InitConfig::EqualSupportRandom,
            _ => InitConfig::HaarRandom,
        };
        ExperimentConfig {
            name: format!("random-{}", rng.random::<u32>()),
            n,
            d,
            steps: rng.random_range(0..500),
            replicas: rng.random_range(1..8),
            master_seed: rng.random::<u64>() >> 1,
            epsilon_grid: (0..rng.random_range(1..4usize))
                .map(|_| rng.random::<f64>() + 1e-3)
                .collect(),
            record_every: if rng.random::<bool>() { None } else { Some(rng.random_range(1..50)) },
            tail_fraction: 0.05 + 0.95 * rng.random::<f64>(),
            outputs: format!("out/run-{}", rng.random::<u16>()),
            phi_every: rng.random_range(0..3),
            rho_mode: match rng.random_range(0..3u8) {
                0 => RhoMode::Auto,
                1 => RhoMode::Exact,
                _ => RhoMode::Heuristic,
            },
            model,
            distribution,
            init,
        }
    }

    #[test]
    fn toml_round_trip_is_exact_for_random_valid_configs() {
        let mut rng = RngStream::new(90, 0);
        for trial in 0..300 {
            let config = random_config(&mut rng);
            config.validate().expect("generated configs are valid");
            let text = config.to_toml_string().expect("serializes");
            let back = ExperimentConfig::from_toml_str(&text)
                .unwrap_or_else(|e| panic!("trial {trial} failed to re-parse: {e}\n{text}"));
            assert_eq!(config, back, "trial {trial} drifted through TOML:\n{text}");
        }
    }

    #[test]
    fn optional_fields_fill_with_defaults() {
        let text = r#"
            name = "minimal"
            n = 2
            d = 3
            steps = 100
            replicas = 1
            master_seed = 42

            [model]
            kind = "signed"
            eta = 0.1

            [distribution]
            kind = "haar"

            [init]
            kind = "haar_random"
        "#;
        let config = ExperimentConfig::from_toml_str(text).unwrap();
        assert_eq!(config.epsilon_grid, vec![0.01]);
        assert_eq!(config.record_every, None);
        assert_eq!(config.tail_fraction, 0.2);
        assert_eq!(config.outputs, "out");
        assert_eq!(config.phi_every, 0);
        assert_eq!(config.rho_mode, RhoMode::Auto);
        assert_eq!(config.effective_record_every(), 1);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        // Unknown keys must land before the first table header to count as
        // top-level keys; appending would bury them inside the last table.
        let text = format!("mystery = 3\n{}", base().to_toml_string().unwrap());
        let err = ExperimentConfig::from_toml_str(&text).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn field_level_validation_catches_bad_values() {
        let cases: Vec<(ExperimentConfig, &str)> = vec![
            (ExperimentConfig { replicas: 0, ..base() }, "replicas"),
            (ExperimentConfig { master_seed: u64::MAX, ..base() }, "master_seed"),
            (ExperimentConfig { record_every: Some(0), ..base() }, "record_every"),
            (ExperimentConfig { tail_fraction: 0.0, ..base() }, "tail_fraction"),
            (ExperimentConfig { epsilon_grid: vec![], ..base() }, "epsilon_grid"),
            (ExperimentConfig { epsilon_grid: vec![-0.1], ..base() }, "epsilon_grid"),
            (ExperimentConfig { model: ModelConfig::Signed { eta: -1.0 }, ..base() }, "model.eta"),
            (
                ExperimentConfig { model: ModelConfig::Party { weights: vec![vec![1.0]] }, ..base() },
                "model.weights",
            ),
            (
                ExperimentConfig {
                    distribution: DistributionConfig::CosineTilt { axis: 9, amplitude: 0.5 },
                    ..base()
                },
                "distribution.axis",
            ),
            (
                ExperimentConfig {
                    distribution: DistributionConfig::CosineTilt { axis: 0, amplitude: 1.0 },
                    ..base()
                },
                "distribution.amplitude",
            ),
            (
                ExperimentConfig {
                    init: InitConfig::Explicit { vectors: vec![vec![1.0, 0.0, 0.0]] },
                    ..base()
                },
                "init.vectors",
            ),
            (
                ExperimentConfig { n: 40, d: 3, init: InitConfig::EqualSupportRandom, ..base() },
                "init",
            ),
        ];
        for (config, field) in cases {
            match config.validate() {
                Err(HarnessError::ConfigInvalid { field: got, .. }) => {
                    assert_eq!(got, field, "wrong field reported");
                }
                other => panic!("expected ConfigInvalid on `{field}`, got {other:?}"),
            }
        }
    }

    #[test]
    fn auto_rho_mode_tracks_population_size() {
        let small = base();
        assert_eq!(small.sim_options().rho_mode, DistanceMode::Exact);
        let big = ExperimentConfig { n: AUTO_EXACT_LIMIT + 1, ..base() };
        assert_eq!(big.sim_options().rho_mode, DistanceMode::Heuristic);
    }

    #[test]
    fn cosine_tilt_builds_the_advertised_density() {
        let config = ExperimentConfig {
            distribution: DistributionConfig::CosineTilt { axis: 1, amplitude: 0.5 },
            ..base()
        };
        match config.to_distribution().unwrap() {
            IssueDistribution::TiltedHaar(t) => {
                assert_eq!(t.bounds(), (0.5, 1.5));
                assert!((t.density(&[0.0, 1.0, 0.0]) - 1.5).abs() < 1e-15);
                assert!((t.density(&[0.0, -1.0, 0.0]) - 0.5).abs() < 1e-15);
            }
            other => panic!("expected a tilted density, got {other:?}"),
        }
    }
}
