//! Command-line front end: one-off runs from a config file, the named
//! acceptance suites, and version reporting.
//!
//! Exit codes: 0 when everything passed, 1 when a run failed or a suite
//! gate did not hold, 2 for usage and config errors.

use clap::{Parser, Subcommand};
use polarsim::config::ExperimentConfig;
use polarsim::suites::{run_suite, DEFAULT_SUITE_SEED, SUITE_NAMES};
use polarsim::{engine, HarnessError};
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(name = "polarsim", version, about = "Opinion dynamics experiments on the unit sphere")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment described by a TOML config file.
    Run {
        /// Path to the experiment config.
        #[arg(long)]
        config: PathBuf,
        /// Worker threads; defaults to all cores, capped by POLARSIM_THREADS.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Run a named acceptance suite and report its gates.
    Suite {
        /// One of: signed-hjmr, party, ortho-weak-not-strong, lemma-checks,
        /// consensus-remark.
        name: String,
        /// Master seed for the suite's ensembles.
        #[arg(long)]
        seed: Option<u64>,
        /// Directory for run artifacts and the suite report.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Worker threads; defaults to all cores, capped by POLARSIM_THREADS.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Print the version.
    Version,
}

fn main() {
    std::process::exit(real_main());
}

fn real_main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 2 } else { 0 };
            let _ = err.print();
            return code;
        }
    };
    match cli.command {
        Command::Run { config, workers } => match run_command(&config, workers) {
            Ok(()) => 0,
            Err(err) => fail(&err),
        },
        Command::Suite { name, seed, out, workers } => {
            match run_suite(&name, seed.unwrap_or(DEFAULT_SUITE_SEED), &out, workers) {
                Ok(report) => {
                    println!("{report}");
                    i32::from(!report.passed())
                }
                Err(err) => fail(&err),
            }
        }
        Command::Version => {
            println!("polarsim {}", env!("CARGO_PKG_VERSION"));
            0
        }
    }
}

fn fail(err: &HarnessError) -> i32 {
    eprintln!("error: {err}");
    if let HarnessError::UnknownSuite { .. } = err {
        eprintln!("usage: polarsim suite <{}>", SUITE_NAMES.join("|"));
    }
    err.exit_code()
}

fn run_command(path: &Path, workers: Option<usize>) -> Result<(), HarnessError> {
    // An unreadable or unparsable config is the caller's mistake, so the
    // whole load phase maps to the usage exit code.
    let config = ExperimentConfig::load(path).map_err(|err| match err {
        HarnessError::Io { path, source } => HarnessError::config(
            "config",
            format!("cannot read {}: {source}", path.display()),
        ),
        other => other,
    })?;
    let outcome = engine::run(&config, workers)?;
    for agg in &outcome.manifest.aggregates {
        println!(
            "epsilon {eps}: {conv}/{total} converged ({frac:.4}), final exceedance {exceed:.4}, mean occupancy {occ:.4}",
            eps = agg.epsilon,
            conv = agg.converged,
            total = config.replicas,
            frac = agg.converged_fraction,
            exceed = agg.final_exceedance_fraction,
            occ = agg.mean_occupancy,
        );
    }
    println!(
        "artifacts: {series}, {summary}, {manifest}",
        series = outcome.series_path.display(),
        summary = outcome.summary_path.display(),
        manifest = outcome.manifest_path.display(),
    );
    Ok(())
}
