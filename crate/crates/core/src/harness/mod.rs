//! Seeded experiment drivers, configuration and result emission.
//!
//! An experiment is described by an [`ExperimentConfig`] (TOML), runs through
//! [`run`] and produces a [`ResultRecord`] which [`emit`] writes as CSV, JSON
//! or SVG. Every replica draws from its own stream keyed by `(seed, replica)`,
//! so the same configuration always produces the same record.

pub mod config;
pub mod emit;
pub mod experiments;
pub mod record;

use std::path::PathBuf;

use thiserror::Error;

use crate::criticality::CriticalityError;
use crate::geometry::GeometryError;
use crate::returnprob::ReturnProbError;
use crate::vacant::AnalysisError;

pub use config::{ExperimentConfig, ExperimentKind, UTimes};
pub use emit::{emit, load_csv_table, OutputFormat};
pub use experiments::{estimate_steps, run, EventOutcome, EventRecord};
pub use record::{Cell, Check, ResultRecord, Table, TOOL_VERSION};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("estimated {estimate} steps per replica exceeds the budget of {budget}")]
    Budget { estimate: u64, budget: u64 },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Criticality(#[from] CriticalityError),
    #[error(transparent)]
    ReturnProb(#[from] ReturnProbError),
}

impl HarnessError {
    /// Process exit code: 2 for configuration problems, 3 for budget
    /// rejection, 4 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Budget { .. } => 3,
            HarnessError::Io { .. } => 4,
            _ => 2,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.into(),
            source,
        }
    }
}
