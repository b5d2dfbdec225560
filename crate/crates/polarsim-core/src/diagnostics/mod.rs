//! Trajectory diagnostics: recorded series, polarization verdicts, decay
//! fits, tie bookkeeping for the coordinate counting process, and the small
//! statistics helpers the verdicts lean on.

mod bins;
mod cluster;
mod fit;
mod stats;

pub use bins::{balls_in_bins_simulate, tie_event_census, BallsInBinsPath, TieCensus};
pub use cluster::cluster_pattern;
pub use fit::{decay_rate_fit, DecayFit, DecayModel};
pub use stats::{chi_square_uniform_pvalue, wilson_interval};

use crate::geometry::{Configuration, GeometryError};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiagnosticsError {
    #[error("epsilon must be positive and finite, got {epsilon}")]
    InvalidEpsilon { epsilon: f64 },
    #[error("tail fraction must lie in (0, 1], got {fraction}")]
    InvalidTailFraction { fraction: f64 },
    #[error("series has no recorded entries")]
    EmptySeries,
    #[error("no entry recorded at time {t}")]
    TimeNotRecorded { t: u64 },
    #[error("need at least {need} points, got {got}")]
    TooFewPoints { got: usize, need: usize },
    #[error("decay fits need strictly positive values, got {value}")]
    NonPositiveValue { value: f64 },
    #[error("power-law fits need strictly positive times, got {t}")]
    NonPositiveTime { t: f64 },
    #[error("successes {successes} exceed trials {trials}")]
    InvalidCounts { successes: u64, trials: u64 },
    #[error("no trials observed")]
    EmptySample,
    #[error("z must be positive and finite, got {z}")]
    InvalidZ { z: f64 },
    #[error("need at least two categories, got {got}")]
    NotEnoughCategories { got: usize },
    #[error("bin process needs at least one bin")]
    NoBins,
    #[error("bin probabilities must be nonnegative and sum to one within 1e-12, sum is {sum}")]
    InvalidBinProbabilities { sum: f64 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// One recorded row of a trajectory. `phi` is present only when the spread
/// potential was requested and defined at this time.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsEntry {
    pub t: u64,
    pub rho: f64,
    pub phi: Option<f64>,
    pub max_angle: f64,
    pub split: bool,
}

/// A recorded trajectory: thinned metric rows plus the exact final state.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsSeries {
    entries: Vec<MetricsEntry>,
    terminal_config: Configuration,
}

impl MetricsSeries {
    pub fn new(entries: Vec<MetricsEntry>, terminal_config: Configuration) -> Self {
        debug_assert!(entries.windows(2).all(|w| w[0].t < w[1].t));
        Self { entries, terminal_config }
    }

    pub fn entries(&self) -> &[MetricsEntry] {
        &self.entries
    }

    pub fn terminal_config(&self) -> &Configuration {
        &self.terminal_config
    }

    pub fn terminal_rho(&self) -> Option<f64> {
        self.entries.last().map(|e| e.rho)
    }

    /// The recorded distance at exactly time `t`.
    pub fn rho_at(&self, t: u64) -> Result<f64, DiagnosticsError> {
        self.entries
            .binary_search_by_key(&t, |e| e.t)
            .map(|idx| self.entries[idx].rho)
            .map_err(|_| DiagnosticsError::TimeNotRecorded { t })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Converged,
    NotConverged,
}

/// Declares convergence to the polarized set when every row in the trailing
/// `tail_fraction` of the series has `rho` strictly below `epsilon`. The
/// tail always contains at least one row. Strictness keeps the verdict
/// consistent with the ensemble exceedance estimate, which counts
/// `rho >= epsilon`: a converged replica can never sit in the exceedance
/// set at any tail time.
pub fn strong_polarization_verdict(
    series: &MetricsSeries,
    epsilon: f64,
    tail_fraction: f64,
) -> Result<Verdict, DiagnosticsError> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(DiagnosticsError::InvalidEpsilon { epsilon });
    }
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(DiagnosticsError::InvalidTailFraction { fraction: tail_fraction });
    }
    let len = series.entries.len();
    if len == 0 {
        return Err(DiagnosticsError::EmptySeries);
    }
    let k = ((len as f64 * tail_fraction).ceil() as usize).clamp(1, len);
    let ok = series.entries[len - k..].iter().all(|e| e.rho < epsilon);
    Ok(if ok { Verdict::Converged } else { Verdict::NotConverged })
}

/// Fraction of recorded rows with `rho <= epsilon`.
pub fn time_average_occupancy(
    series: &MetricsSeries,
    epsilon: f64,
) -> Result<f64, DiagnosticsError> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(DiagnosticsError::InvalidEpsilon { epsilon });
    }
    if series.entries.is_empty() {
        return Err(DiagnosticsError::EmptySeries);
    }
    let hits = series.entries.iter().filter(|e| e.rho <= epsilon).count();
    Ok(hits as f64 / series.entries.len() as f64)
}

/// A proportion with a Wilson score interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateWithCI {
    pub t: u64,
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    pub successes: u64,
    pub trials: u64,
}

/// Across an ensemble, the probability that `rho >= threshold` at each
/// requested time, with 95 percent Wilson intervals. Every series must have
/// recorded rows at all requested times.
pub fn weak_polarization_curve(
    ensemble: &[MetricsSeries],
    times: &[u64],
    threshold: f64,
) -> Result<Vec<EstimateWithCI>, DiagnosticsError> {
    if !(threshold.is_finite() && threshold > 0.0) {
        return Err(DiagnosticsError::InvalidEpsilon { epsilon: threshold });
    }
    if ensemble.is_empty() {
        return Err(DiagnosticsError::EmptySample);
    }
    let trials = ensemble.len() as u64;
    times
        .iter()
        .map(|&t| {
            let mut successes = 0u64;
            for series in ensemble {
                if series.rho_at(t)? >= threshold {
                    successes += 1;
                }
            }
            let (lower, upper) = wilson_interval(successes, trials, 1.96)?;
            Ok(EstimateWithCI {
                t,
                estimate: successes as f64 / trials as f64,
                lower,
                upper,
                successes,
                trials,
            })
        })
        .collect()
}
