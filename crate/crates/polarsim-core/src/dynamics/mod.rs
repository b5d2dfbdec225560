//! Update models for issue-driven opinion dynamics.
//!
//! Each step draws one issue vector `xi` and moves every agent to the
//! normalization of `x_i + f_i(X, xi)`:
//!
//! * correlation model: `f_i = eta <x_i, xi> xi`, attraction weighted by the
//!   signed correlation with the issue;
//! * signed model: `f_i = eta sgn(<x_i, xi>) xi`, attraction of constant
//!   strength toward the agent's side of the issue;
//! * party model: agents pull toward everyone currently on their side of the
//!   issue and away from the rest, with per-pair influence weights.
//!
//! `sgn(0) = 0` throughout: an agent exactly on the issue hyperplane ignores
//! a signed issue and, in the party model, sides only with other exactly-zero
//! agents.

mod graph;
mod issue;
mod orthonormal;
mod simulate;

pub use graph::{is_irreducible, InfluenceGraph};
pub use issue::{sample_issue, FiniteSupport, IssueDistribution, TiltedHaar};
pub use orthonormal::orthonormal_closed_form;
pub use simulate::{default_record_every, simulate, SimOptions};

use crate::geometry::{Configuration, GeometryError, UnitVector, ZERO_TOL};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("update rate must be positive and finite, got {eta}")]
    InvalidEta { eta: f64 },
    #[error("influence matrix row {index} has {len} entries, expected {rows}")]
    RaggedInfluence { rows: usize, index: usize, len: usize },
    #[error("influence weights must be finite and nonnegative, got {value} at ({i}, {j})")]
    InvalidInfluenceWeight { value: f64, i: usize, j: usize },
    #[error("model is sized for {expected} agents, configuration has {got}")]
    WrongPopulation { expected: usize, got: usize },
    #[error("agent {agent} produced an exactly zero update at step {step}")]
    ZeroUpdate { agent: usize, step: u64 },
    #[error("issue distribution lives in dimension {expected}, requested {got}")]
    WrongIssueDimension { expected: usize, got: usize },
    #[error("rejection sampling stalled after {proposals} consecutive rejections")]
    RejectionStall { proposals: u64 },
    #[error("issue density value {value} falls outside the declared bounds [{lower}, {upper}]")]
    DensityOutOfBounds { value: f64, lower: f64, upper: f64 },
    #[error("atom probabilities must be nonnegative and sum to one within 1e-12, sum is {sum}")]
    InvalidProbabilities { sum: f64 },
    #[error("density bounds must satisfy 0 < lower <= upper, got [{lower}, {upper}]")]
    InvalidDensityBounds { lower: f64, upper: f64 },
    #[error("recording cadence must be at least 1")]
    InvalidRecordEvery,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Nonnegative pull strengths `weights[i][j]` of agent `j` on agent `i` for
/// the party model. A zero entry means no direct influence.
#[derive(Debug, Clone, PartialEq)]
pub struct InfluenceMatrix {
    n: usize,
    weights: Vec<f64>,
}

impl InfluenceMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self, DynamicsError> {
        let n = rows.len();
        let mut weights = Vec::with_capacity(n * n);
        for (index, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(DynamicsError::RaggedInfluence { rows: n, index, len: row.len() });
            }
            for (j, &value) in row.iter().enumerate() {
                if !value.is_finite() || value < 0.0 {
                    return Err(DynamicsError::InvalidInfluenceWeight { value, i: index, j });
                }
                weights.push(value);
            }
        }
        Ok(Self { n, weights })
    }

    /// Cycle topology: every agent listens to itself with `self_weight` and
    /// to its successor `(i + 1) mod n` with `neighbor_weight`.
    pub fn directed_cycle(
        n: usize,
        self_weight: f64,
        neighbor_weight: f64,
    ) -> Result<Self, DynamicsError> {
        let mut rows = vec![vec![0.0; n]; n];
        for (i, row) in rows.iter_mut().enumerate() {
            row[i] = self_weight;
            row[(i + 1) % n] = neighbor_weight;
        }
        Self::new(rows)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.n + j]
    }
}

/// The update rule applied at every step.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    Correlation { eta: f64 },
    Signed { eta: f64 },
    Party { influence: InfluenceMatrix },
}

impl ModelSpec {
    /// Checks internal parameters and the population size they imply.
    pub fn validate(&self, n: usize) -> Result<(), DynamicsError> {
        match self {
            ModelSpec::Correlation { eta } | ModelSpec::Signed { eta } => {
                if !(eta.is_finite() && *eta > 0.0) {
                    return Err(DynamicsError::InvalidEta { eta: *eta });
                }
            }
            ModelSpec::Party { influence } => {
                if influence.n() != n {
                    return Err(DynamicsError::WrongPopulation { expected: influence.n(), got: n });
                }
            }
        }
        Ok(())
    }
}

fn sgn(t: f64) -> i8 {
    if t > 0.0 {
        1
    } else if t < 0.0 {
        -1
    } else {
        0
    }
}

/// Applies one synchronous update and renormalizes every agent.
pub fn step(
    model: &ModelSpec,
    x: &Configuration,
    issue: &UnitVector,
) -> Result<Configuration, DynamicsError> {
    let n = x.n();
    let d = x.dim();
    model.validate(n)?;
    if issue.dim() != d {
        return Err(DynamicsError::WrongIssueDimension { expected: d, got: issue.dim() });
    }
    let state = x.to_flat();
    let mut out = vec![0.0; n * d];
    let mut signs = Vec::new();
    step_flat(model, &state, n, d, issue.coords(), &mut out, &mut signs)?;
    Ok(Configuration::from_flat(&out, n, d))
}

/// Stepping kernel over row-major coordinates; `out` receives normalized
/// rows. Zero updates are reported with step index 0, callers running a
/// trajectory substitute the real time.
pub(crate) fn step_flat(
    model: &ModelSpec,
    state: &[f64],
    n: usize,
    d: usize,
    issue: &[f64],
    out: &mut [f64],
    signs: &mut Vec<i8>,
) -> Result<(), DynamicsError> {
    debug_assert_eq!(state.len(), n * d);
    debug_assert_eq!(out.len(), n * d);
    match model {
        ModelSpec::Correlation { eta } => {
            for i in 0..n {
                let row = &state[i * d..(i + 1) * d];
                let weight = eta * crate::geometry::dot(row, issue);
                let target = &mut out[i * d..(i + 1) * d];
                for k in 0..d {
                    target[k] = row[k] + weight * issue[k];
                }
                // |x + eta c xi|^2 = 1 + 2 eta c^2 + (eta c^2)^2 >= 1.
                normalize_row(target, i, 0)?;
            }
        }
        ModelSpec::Signed { eta } => {
            for i in 0..n {
                let row = &state[i * d..(i + 1) * d];
                let weight = eta * f64::from(sgn(crate::geometry::dot(row, issue)));
                let target = &mut out[i * d..(i + 1) * d];
                for k in 0..d {
                    target[k] = row[k] + weight * issue[k];
                }
                // |x + eta s xi|^2 = 1 + 2 eta |c| + eta^2 >= 1.
                normalize_row(target, i, 0)?;
            }
        }
        ModelSpec::Party { influence } => {
            issue_signs(state, n, d, issue, signs);
            for i in 0..n {
                let target = &mut out[i * d..(i + 1) * d];
                target.copy_from_slice(&state[i * d..(i + 1) * d]);
                for j in 0..n {
                    let w = influence.get(i, j);
                    if w == 0.0 {
                        continue;
                    }
                    // Same side attracts, the other side repels; agent i
                    // always counts as its own side.
                    let signed = if signs[j] == signs[i] { w } else { -w };
                    let row = &state[j * d..(j + 1) * d];
                    for k in 0..d {
                        target[k] += signed * row[k];
                    }
                }
                normalize_row(target, i, 0)?;
            }
        }
    }
    Ok(())
}

fn normalize_row(row: &mut [f64], agent: usize, step: u64) -> Result<(), DynamicsError> {
    let norm = row.iter().map(|c| c * c).sum::<f64>().sqrt();
    if norm < ZERO_TOL {
        return Err(DynamicsError::ZeroUpdate { agent, step });
    }
    for c in row.iter_mut() {
        *c /= norm;
    }
    Ok(())
}

fn issue_signs(state: &[f64], n: usize, d: usize, issue: &[f64], signs: &mut Vec<i8>) {
    signs.clear();
    signs.extend((0..n).map(|i| sgn(crate::geometry::dot(&state[i * d..(i + 1) * d], issue))));
}

/// True when the issue splits the population: at least two agents disagree in
/// `sgn(<x_i, xi>)`, with exact zeros forming their own class.
pub fn split_event(x: &Configuration, issue: &UnitVector) -> Result<bool, DynamicsError> {
    if issue.dim() != x.dim() {
        return Err(DynamicsError::WrongIssueDimension { expected: x.dim(), got: issue.dim() });
    }
    Ok(split_flat(&x.to_flat(), x.n(), x.dim(), issue.coords()))
}

pub(crate) fn split_flat(state: &[f64], n: usize, d: usize, issue: &[f64]) -> bool {
    let first = sgn(crate::geometry::dot(&state[0..d], issue));
    (1..n).any(|i| sgn(crate::geometry::dot(&state[i * d..(i + 1) * d], issue)) != first)
}
