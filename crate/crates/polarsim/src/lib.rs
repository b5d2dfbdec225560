//! Experiment harness around `polarsim-core`: config files, deterministic
//! replica fan-out, CSV/JSON artifacts, and the named acceptance suites.
//!
//! The library half is what the `polarsim` binary calls into. Everything a
//! suite or the CLI produces flows through [`engine::run`], so artifact
//! layout and determinism guarantees live in one place.

pub mod config;
pub mod engine;
pub mod suites;

use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    /// The config failed validation; `field` names the offending entry.
    #[error("invalid config `{field}`: {message}")]
    ConfigInvalid { field: String, message: String },
    #[error("unknown suite `{name}`, expected one of: {expected}")]
    UnknownSuite { name: String, expected: String },
    /// An error raised while running one replica's trajectory.
    #[error("replica {replica}: {source}")]
    Replica { replica: u64, source: polarsim_core::dynamics::DynamicsError },
    /// Rejection sampling for an initializer exhausted its attempt budget.
    #[error("replica {replica}: init sampling stalled after {attempts} attempts")]
    InitStalled { replica: u64, attempts: u64 },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("worker pool: {0}")]
    Pool(String),
    #[error(transparent)]
    Geometry(#[from] polarsim_core::geometry::GeometryError),
    #[error(transparent)]
    Dynamics(#[from] polarsim_core::dynamics::DynamicsError),
    #[error(transparent)]
    Diagnostics(#[from] polarsim_core::diagnostics::DiagnosticsError),
}

impl HarnessError {
    pub fn config(field: &str, message: impl Into<String>) -> Self {
        Self::ConfigInvalid { field: field.to_string(), message: message.into() }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }

    /// Process exit code the CLI maps this error to: config and usage
    /// problems exit 2, everything else is a runtime failure and exits 1.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::ConfigInvalid { .. } | Self::UnknownSuite { .. } => 2,
            _ => 1,
        }
    }
}
