//! Deterministic replica fan-out and artifact writing.
//!
//! One run executes `replicas` independent trajectories. Replica `r` owns
//! the RNG stream with index `r` under the config's master seed, for both
//! its starting draw and its issue sequence, so results are reproducible
//! per replica no matter how work is scheduled. Workers only compute;
//! every byte of output is written on this thread in replica order, which
//! makes `series.csv` and `summary.csv` identical for any worker count.
//!
//! Replicas are processed in fixed-size batches so that at most a batchful
//! of recorded series is ever held in memory while the CSV streams out.

use crate::config::{ExperimentConfig, InitConfig};
use crate::HarnessError;
use polarsim_core::diagnostics::{
    strong_polarization_verdict, time_average_occupancy, MetricsSeries, Verdict,
};
use polarsim_core::dynamics::{simulate, IssueDistribution, ModelSpec, SimOptions};
use polarsim_core::geometry::{haar_unit_vector, project_to_sphere, Configuration, UnitVector};
use polarsim_core::rng::RngStream;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::time::Instant;

/// Replicas processed per scheduling batch; bounds peak memory, never
/// affects output bytes.
const REPLICA_BATCH: u64 = 64;

/// Whole-population redraws an init sampler may spend before giving up.
const INIT_ATTEMPTS: u64 = 1_000_000;

/// What `run` leaves on disk and hands back in memory.
#[derive(Debug)]
pub struct RunOutcome {
    pub manifest: RunManifest,
    pub summaries: Vec<ReplicaSummary>,
    pub series_path: PathBuf,
    pub summary_path: PathBuf,
    pub manifest_path: PathBuf,
}

/// Per-replica reduction of the recorded series; one row per epsilon lands
/// in `summary.csv`.
#[derive(Debug, Clone)]
pub struct ReplicaSummary {
    pub replica: u64,
    pub terminal_rho: f64,
    /// Parallel to the config's `epsilon_grid`.
    pub verdicts: Vec<Verdict>,
    /// Fraction of recorded rows with `rho <= epsilon`, parallel likewise.
    pub occupancy: Vec<f64>,
}

/// `manifest.json`: the config echo plus everything needed to audit a run.
/// Re-running the echoed config reproduces the CSV files byte for byte;
/// only `wall_clock_seconds` varies between such runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub artifact_version: String,
    pub config: ExperimentConfig,
    pub workers: usize,
    pub effective_record_every: u64,
    pub stream_indices: Vec<u64>,
    /// True when explicit init vectors needed renormalization.
    pub normalized_init: bool,
    pub wall_clock_seconds: f64,
    pub terminal_rho: Vec<f64>,
    pub aggregates: Vec<EpsilonAggregate>,
}

/// Ensemble verdicts at one epsilon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonAggregate {
    pub epsilon: f64,
    pub converged: u64,
    pub converged_fraction: f64,
    /// Share of replicas with terminal `rho >= epsilon`. Strong convergence
    /// implies staying below epsilon through the tail, so this never
    /// overlaps the converged share.
    pub final_exceedance_fraction: f64,
    pub mean_occupancy: f64,
}

/// View of one finished replica handed to `run_mapped`'s observer.
pub struct ReplicaTrace<'a> {
    pub replica: u64,
    pub initial: &'a Configuration,
    pub series: &'a MetricsSeries,
}

/// Parses the `POLARSIM_THREADS` cap; `None` means no cap.
fn parse_thread_cap(value: Option<&str>) -> Result<Option<usize>, HarnessError> {
    match value {
        None => Ok(None),
        Some(text) => match text.trim().parse::<usize>() {
            Ok(0) | Err(_) => Err(HarnessError::config(
                "POLARSIM_THREADS",
                format!("expected a positive integer, got `{text}`"),
            )),
            Ok(cap) => Ok(Some(cap)),
        },
    }
}

/// Worker count for a run: the explicit request (or every available core),
/// capped by `POLARSIM_THREADS`.
pub fn resolve_workers(requested: Option<usize>) -> Result<usize, HarnessError> {
    if requested == Some(0) {
        return Err(HarnessError::config("workers", "at least one worker is required"));
    }
    let env = std::env::var("POLARSIM_THREADS").ok();
    let cap = parse_thread_cap(env.as_deref())?;
    let base = requested
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |p| p.get()));
    Ok(base.min(cap.unwrap_or(usize::MAX)).max(1))
}

/// Runs the experiment and writes `series.csv`, `summary.csv`, and
/// `manifest.json` under the config's output directory.
pub fn run(config: &ExperimentConfig, workers: Option<usize>) -> Result<RunOutcome, HarnessError> {
    run_mapped(config, workers, |_| Ok(())).map(|(outcome, _)| outcome)
}

/// `run`, plus a per-replica observer whose results come back indexed by
/// replica. The observer runs on worker threads against the full recorded
/// series, so suites can reduce trajectories without holding the whole
/// ensemble in memory.
pub fn run_mapped<S, F>(
    config: &ExperimentConfig,
    workers: Option<usize>,
    observe: F,
) -> Result<(RunOutcome, Vec<S>), HarnessError>
where
    S: Send,
    F: Fn(&ReplicaTrace<'_>) -> Result<S, HarnessError> + Sync,
{
    let started = Instant::now();
    config.validate()?;
    let workers = resolve_workers(workers)?;

    let model = config.to_model()?;
    let distribution = config.to_distribution()?;
    let opts = config.sim_options();
    model.validate(config.n)?;
    if let Some(required) = distribution.dim_constraint() {
        if required != config.d {
            return Err(HarnessError::config(
                "distribution",
                format!("distribution lives in dimension {required}, config says {}", config.d),
            ));
        }
    }

    // Explicit starts are replica-independent; normalize once and remember
    // whether that moved anything.
    let (explicit, normalized_init) = match &config.init {
        InitConfig::Explicit { vectors } => {
            let mut touched = false;
            let mut agents = Vec::with_capacity(vectors.len());
            for v in vectors {
                let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
                touched |= (norm - 1.0).abs() > 1e-12;
                agents.push(project_to_sphere(v)?);
            }
            (Some(Configuration::new(agents)?), touched)
        }
        _ => (None, false),
    };

    let out_dir = PathBuf::from(&config.outputs);
    std::fs::create_dir_all(&out_dir).map_err(|e| HarnessError::io(&out_dir, e))?;
    let series_path = out_dir.join("series.csv");
    let summary_path = out_dir.join("summary.csv");
    let manifest_path = out_dir.join("manifest.json");
    let mut series_w = BufWriter::with_capacity(
        1 << 20,
        File::create(&series_path).map_err(|e| HarnessError::io(&series_path, e))?,
    );
    let mut summary_w = BufWriter::new(
        File::create(&summary_path).map_err(|e| HarnessError::io(&summary_path, e))?,
    );
    writeln!(series_w, "replica,t,rho,phi,max_angle,split")
        .map_err(|e| HarnessError::io(&series_path, e))?;
    writeln!(summary_w, "replica,epsilon,verdict,terminal_rho,occupancy")
        .map_err(|e| HarnessError::io(&summary_path, e))?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| HarnessError::Pool(e.to_string()))?;

    let mut summaries: Vec<ReplicaSummary> =
        Vec::with_capacity(usize::try_from(config.replicas).unwrap_or(0));
    let mut mapped: Vec<S> = Vec::with_capacity(summaries.capacity());

    let mut start = 0u64;
    while start < config.replicas {
        let end = (start + REPLICA_BATCH).min(config.replicas);
        let batch: Vec<Result<(ReplicaSummary, MetricsSeries, S), HarnessError>> =
            pool.install(|| {
                (start..end)
                    .into_par_iter()
                    .map(|replica| {
                        run_replica(replica, config, &model, &distribution, &opts, &explicit)
                            .and_then(|(summary, initial, series)| {
                                let trace =
                                    ReplicaTrace { replica, initial: &initial, series: &series };
                                let observed = observe(&trace)?;
                                Ok((summary, series, observed))
                            })
                    })
                    .collect()
            });
        for result in batch {
            let (summary, series, observed) = result?;
            write_series_rows(&mut series_w, summary.replica, &series)
                .map_err(|e| HarnessError::io(&series_path, e))?;
            write_summary_rows(&mut summary_w, config, &summary)
                .map_err(|e| HarnessError::io(&summary_path, e))?;
            summaries.push(summary);
            mapped.push(observed);
        }
        start = end;
    }
    series_w.flush().map_err(|e| HarnessError::io(&series_path, e))?;
    summary_w.flush().map_err(|e| HarnessError::io(&summary_path, e))?;

    let aggregates = aggregate(config, &summaries);
    for agg in &aggregates {
        // Strong convergence forbids a terminal exceedance, so the two
        // shares can never sum past one; a violation is an engine bug.
        assert!(
            agg.converged_fraction + agg.final_exceedance_fraction <= 1.0 + 1e-12,
            "converged share {} overlaps final exceedance share {} at epsilon {}",
            agg.converged_fraction,
            agg.final_exceedance_fraction,
            agg.epsilon
        );
    }

    let manifest = RunManifest {
        artifact_version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        workers,
        effective_record_every: config.effective_record_every(),
        stream_indices: (0..config.replicas).collect(),
        normalized_init,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
        terminal_rho: summaries.iter().map(|s| s.terminal_rho).collect(),
        aggregates,
    };
    let mut manifest_bytes = serde_json::to_vec_pretty(&manifest)
        .map_err(|e| HarnessError::config("manifest", e.to_string()))?;
    manifest_bytes.push(b'\n');
    std::fs::write(&manifest_path, manifest_bytes)
        .map_err(|e| HarnessError::io(&manifest_path, e))?;

    let outcome =
        RunOutcome { manifest, summaries, series_path, summary_path, manifest_path };
    Ok((outcome, mapped))
}

fn run_replica(
    replica: u64,
    config: &ExperimentConfig,
    model: &ModelSpec,
    distribution: &IssueDistribution,
    opts: &SimOptions,
    explicit: &Option<Configuration>,
) -> Result<(ReplicaSummary, Configuration, MetricsSeries), HarnessError> {
    let mut rng = RngStream::new(config.master_seed, replica);
    let initial = match explicit {
        Some(cfg) => cfg.clone(),
        None => sample_init(&config.init, config.n, config.d, replica, &mut rng)?,
    };
    let series = simulate(model, distribution, &initial, config.steps, opts, &mut rng)
        .map_err(|source| HarnessError::Replica { replica, source })?;
    let terminal_rho = series.terminal_rho().expect("series always records the final state");
    let mut verdicts = Vec::with_capacity(config.epsilon_grid.len());
    let mut occupancy = Vec::with_capacity(config.epsilon_grid.len());
    for &eps in &config.epsilon_grid {
        verdicts.push(strong_polarization_verdict(&series, eps, config.tail_fraction)?);
        occupancy.push(time_average_occupancy(&series, eps)?);
    }
    Ok((ReplicaSummary { replica, terminal_rho, verdicts, occupancy }, initial, series))
}

/// Draws one starting configuration from the replica's stream.
fn sample_init(
    init: &InitConfig,
    n: usize,
    d: usize,
    replica: u64,
    rng: &mut RngStream,
) -> Result<Configuration, HarnessError> {
    match init {
        InitConfig::Explicit { .. } => unreachable!("explicit starts are prebuilt"),
        InitConfig::HaarRandom => {
            let agents =
                (0..n).map(|_| haar_unit_vector(d, rng)).collect::<Result<Vec<_>, _>>()?;
            Ok(Configuration::new(agents)?)
        }
        InitConfig::Polarized => {
            let center = haar_unit_vector(d, rng)?;
            let agents = (0..n)
                .map(|_| if rng.random::<bool>() { center.clone() } else { center.negated() })
                .collect();
            Ok(Configuration::new(agents)?)
        }
        InitConfig::EqualSupportRandom => {
            for _ in 0..INIT_ATTEMPTS {
                // Support uniform over subsets of size >= 2, shared by all
                // agents; each agent Haar on that subsphere.
                let mask = rng.random_range(1..(1u64 << d));
                if mask.count_ones() < 2 {
                    continue;
                }
                let support: Vec<usize> = (0..d).filter(|k| mask >> k & 1 == 1).collect();
                let mut agents = Vec::with_capacity(n);
                let mut signs: Vec<Vec<i8>> = Vec::with_capacity(n);
                for _ in 0..n {
                    let sub = haar_unit_vector(support.len(), rng)?;
                    let mut coords = vec![0.0; d];
                    for (slot, &k) in support.iter().enumerate() {
                        coords[k] = sub.coords()[slot];
                    }
                    signs.push(
                        sub.coords().iter().map(|&c| if c < 0.0 { -1 } else { 1 }).collect(),
                    );
                    agents.push(UnitVector::new(coords)?);
                }
                // Sign-equal up to a global flip would start the pair inside
                // (or jointly headed for) the polarized set; redraw.
                let clash = (0..n).any(|i| {
                    (i + 1..n).any(|j| {
                        signs[i] == signs[j]
                            || signs[i].iter().zip(&signs[j]).all(|(a, b)| *a == -*b)
                    })
                });
                if !clash {
                    return Ok(Configuration::new(agents)?);
                }
            }
            Err(HarnessError::InitStalled { replica, attempts: INIT_ATTEMPTS })
        }
    }
}

/// Floats carry 17 significant digits so a reader recovers the exact bits.
fn fmt17(value: f64) -> String {
    format!("{value:.16e}")
}

fn write_series_rows(
    w: &mut impl Write,
    replica: u64,
    series: &MetricsSeries,
) -> std::io::Result<()> {
    for entry in series.entries() {
        let phi = entry.phi.map(fmt17).unwrap_or_default();
        writeln!(
            w,
            "{replica},{t},{rho},{phi},{max_angle},{split}",
            t = entry.t,
            rho = fmt17(entry.rho),
            max_angle = fmt17(entry.max_angle),
            split = u8::from(entry.split),
        )?;
    }
    Ok(())
}

fn write_summary_rows(
    w: &mut impl Write,
    config: &ExperimentConfig,
    summary: &ReplicaSummary,
) -> std::io::Result<()> {
    for (k, &eps) in config.epsilon_grid.iter().enumerate() {
        let verdict = match summary.verdicts[k] {
            Verdict::Converged => "Converged",
            Verdict::NotConverged => "NotConverged",
        };
        writeln!(
            w,
            "{replica},{eps},{verdict},{rho},{occ}",
            replica = summary.replica,
            eps = fmt17(eps),
            rho = fmt17(summary.terminal_rho),
            occ = fmt17(summary.occupancy[k]),
        )?;
    }
    Ok(())
}

fn aggregate(config: &ExperimentConfig, summaries: &[ReplicaSummary]) -> Vec<EpsilonAggregate> {
    let total = summaries.len() as f64;
    config
        .epsilon_grid
        .iter()
        .enumerate()
        .map(|(k, &epsilon)| {
            let converged =
                summaries.iter().filter(|s| s.verdicts[k] == Verdict::Converged).count() as u64;
            let exceed = summaries.iter().filter(|s| s.terminal_rho >= epsilon).count() as f64;
            let mean_occupancy =
                summaries.iter().map(|s| s.occupancy[k]).sum::<f64>() / total;
            EpsilonAggregate {
                epsilon,
                converged,
                converged_fraction: converged as f64 / total,
                final_exceedance_fraction: exceed / total,
                mean_occupancy,
            }
        })
        .collect()
}
