//! Running one trajectory and recording its diagnostics.

use super::{sample_issue, split_flat, step_flat, DynamicsError, IssueDistribution, ModelSpec};
use crate::diagnostics::{MetricsEntry, MetricsSeries};
use crate::geometry::{
    canonical_sign_alignment, distance_to_polarized, dot, max_pairwise_angle, Configuration,
    DistanceMode, GeometryError, ZERO_TOL,
};
use rand::Rng;
use std::f64::consts::FRAC_PI_2;

/// What to record along a trajectory.
///
/// `record_every` thins the series; the initial and final states are always
/// kept. `phi_every = 0` disables the spread potential entirely (it is by far
/// the most expensive diagnostic); a positive cadence computes it on recorded
/// rows at that step spacing, and only when the configuration is acute after
/// sign alignment, so the value is `None` on rows where it is skipped or
/// undefined.
#[derive(Debug, Clone, PartialEq)]
pub struct SimOptions {
    pub record_every: u64,
    pub rho_mode: DistanceMode,
    pub phi_every: u64,
    pub phi_tol: f64,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            record_every: 1,
            rho_mode: DistanceMode::Exact,
            phi_every: 0,
            phi_tol: crate::geometry::PHI_DEFAULT_TOL,
        }
    }
}

/// Cadence that caps a recorded series at roughly ten thousand rows.
pub fn default_record_every(steps: u64) -> u64 {
    if steps <= 10_000 {
        1
    } else {
        steps.div_ceil(10_000)
    }
}

/// Runs `steps` synchronous updates from `x0`, drawing one issue per step.
///
/// The entry at time `t` describes the state before that step's issue is
/// applied; its `split` flag says whether that issue divided the population.
/// The final entry carries `split = false` since no further issue is drawn.
pub fn simulate<R: Rng + ?Sized>(
    model: &ModelSpec,
    issues: &IssueDistribution,
    x0: &Configuration,
    steps: u64,
    opts: &SimOptions,
    rng: &mut R,
) -> Result<MetricsSeries, DynamicsError> {
    let n = x0.n();
    let d = x0.dim();
    model.validate(n)?;
    if let Some(required) = issues.dim_constraint() {
        if required != d {
            return Err(DynamicsError::WrongIssueDimension { expected: required, got: d });
        }
    }
    if opts.record_every == 0 {
        return Err(DynamicsError::InvalidRecordEvery);
    }
    if opts.phi_every > 0 && !(opts.phi_tol.is_finite() && opts.phi_tol > 0.0) {
        return Err(GeometryError::InvalidTolerance { tol: opts.phi_tol }.into());
    }

    let mut state = x0.to_flat();
    let mut next = vec![0.0; n * d];
    let mut signs = Vec::with_capacity(n);
    let mut entries =
        Vec::with_capacity(usize::try_from(steps / opts.record_every).unwrap_or(0) + 2);

    for t in 0..=steps {
        let record = t == steps || t % opts.record_every == 0;
        let mut entry = if record {
            let cfg = Configuration::from_flat(&state, n, d);
            let rho = distance_to_polarized(&cfg, opts.rho_mode)?.rho;
            let max_angle = max_pairwise_angle(&cfg);
            let phi = if opts.phi_every > 0 && (t == steps || t % opts.phi_every == 0) {
                acute_phi(&cfg, opts.phi_tol)?
            } else {
                None
            };
            Some(MetricsEntry { t, rho, phi, max_angle, split: false })
        } else {
            None
        };
        if t < steps {
            let issue = sample_issue(issues, d, rng)?;
            if let Some(e) = entry.as_mut() {
                e.split = split_flat(&state, n, d, issue.coords());
            }
            step_flat(model, &state, n, d, issue.coords(), &mut next, &mut signs).map_err(
                |err| match err {
                    DynamicsError::ZeroUpdate { agent, .. } => {
                        DynamicsError::ZeroUpdate { agent, step: t }
                    }
                    other => other,
                },
            )?;
            std::mem::swap(&mut state, &mut next);
        }
        if let Some(e) = entry {
            entries.push(e);
        }
    }

    Ok(MetricsSeries::new(entries, Configuration::from_flat(&state, n, d)))
}

/// Spread potential, but only when the sign-aligned configuration sits
/// strictly inside an open hemisphere around its mean and the resulting
/// spread is acute. Outside that regime the potential is not informative and
/// its solver may not certify, so the row records `None`.
fn acute_phi(cfg: &Configuration, tol: f64) -> Result<Option<f64>, DynamicsError> {
    let (_, aligned) = canonical_sign_alignment(cfg);
    let d = aligned.dim();
    let mut mean = vec![0.0; d];
    for agent in aligned.agents() {
        for (m, c) in mean.iter_mut().zip(agent.coords()) {
            *m += c;
        }
    }
    let norm = mean.iter().map(|c| c * c).sum::<f64>().sqrt();
    if norm < ZERO_TOL {
        return Ok(None);
    }
    for m in &mut mean {
        *m /= norm;
    }
    if aligned.agents().iter().any(|a| dot(&mean, a.coords()) <= 0.0) {
        return Ok(None);
    }
    match crate::geometry::phi_potential(&aligned, tol) {
        Ok(result) if result.phi < FRAC_PI_2 => Ok(Some(result.phi)),
        Ok(_) => Ok(None),
        Err(GeometryError::DegenerateInput) => Ok(None),
        Err(err) => Err(err.into()),
    }
}
