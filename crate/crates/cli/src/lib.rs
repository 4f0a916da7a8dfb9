//! Batch pipeline over research-funding collaboration tables.
//!
//! Four stages, each reading only its configured inputs or the outputs of the
//! stage before it and writing one directory under the output root:
//!
//! * `ingest`: parse, merge and topic-filter the tables; yearly weights.
//! * `analyze`: yearly graphs, centrality, solution spaces and partitions.
//! * `temporal`: lineage events, global labels and community series.
//! * `report`: one versioned bundle of plot-ready data.
//!
//! Every stage directory carries a `manifest.json` with the effective config
//! and SHA-256 digests of what was read and written. Outputs are staged in
//! memory and committed together, so a failing stage leaves nothing behind.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub mod artifacts;
pub mod config;
pub mod stages;

pub use artifacts::{Artifacts, FileDigest, Manifest, YearFailure, MANIFEST_SCHEMA_VERSION};
pub use config::{Overrides, RunConfig};
pub use stages::{run_stage, year_seed};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Ingest,
    Analyze,
    Temporal,
    Report,
}

impl Stage {
    pub const ALL: [Stage; 4] = [Stage::Ingest, Stage::Analyze, Stage::Temporal, Stage::Report];

    pub fn dir_name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Analyze => "analyze",
            Stage::Temporal => "temporal",
            Stage::Report => "report",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.dir_name())
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("missing input: {0}")]
    MissingInput(PathBuf),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Malformed { path: PathBuf, message: String },
    #[error("{0} outputs were produced with a different configuration; rerun that stage first")]
    StaleUpstream(Stage),
    #[error("refusing to overwrite {0}: it exists and has no manifest")]
    ForeignDirectory(PathBuf),
    #[error(transparent)]
    Ingest(#[from] collabnet::ingest::IngestError),
    #[error(transparent)]
    Temporal(#[from] collabnet::temporal::TemporalError),
    #[error("{0}")]
    Stage(String),
}

impl PipelineError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        PipelineError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn malformed(path: &Path, message: impl fmt::Display) -> Self {
        PipelineError::Malformed {
            path: path.to_path_buf(),
            message: message.to_string(),
        }
    }
}

/// Result of a stage that wrote its outputs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outcome {
    pub failures: Vec<YearFailure>,
}

impl Outcome {
    pub fn is_partial(&self) -> bool {
        !self.failures.is_empty()
    }
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARTIAL: i32 = 1;
pub const EXIT_FATAL: i32 = 2;

pub fn exit_code(result: &Result<Outcome, PipelineError>) -> i32 {
    match result {
        Ok(o) if o.is_partial() => EXIT_PARTIAL,
        Ok(_) => EXIT_OK,
        Err(_) => EXIT_FATAL,
    }
}
