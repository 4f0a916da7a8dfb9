mod analyze;
mod ingest;
mod report;
pub mod rows;
mod temporal;

use std::path::{Path, PathBuf};

use collabnet::solution_space::trial_seed;
use serde::de::DeserializeOwned;

use crate::artifacts::{FileDigest, Manifest, MANIFEST};
use crate::config::RunConfig;
use crate::{Outcome, PipelineError, Stage};

pub use report::{Bundle, NetworkYear, SolutionSpaceSummary, BUNDLE_SCHEMA_VERSION};

/// Runs one stage on a pool of `config.workers` threads (0 = all cores).
pub fn run_stage(stage: Stage, config: &RunConfig) -> Result<Outcome, PipelineError> {
    config.check()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| PipelineError::Stage(format!("cannot start worker pool: {e}")))?;
    pool.install(|| match stage {
        Stage::Ingest => ingest::run(config),
        Stage::Analyze => analyze::run(config),
        Stage::Temporal => temporal::run(config),
        Stage::Report => report::run(config),
    })
}

/// Base seed of one year's exploration, derived from the run seed.
pub fn year_seed(base: u64, year: i32) -> u64 {
    trial_seed(base, year as u32 as usize)
}

/// Config sections each stage's outputs depend on.
fn sections(stage: Stage) -> &'static [&'static str] {
    match stage {
        Stage::Ingest => &["input", "ingest"],
        Stage::Analyze => &["input", "ingest", "graph", "community", "exploration", "seed"],
        Stage::Temporal | Stage::Report => &["input", "ingest", "graph", "community", "exploration", "seed", "temporal"],
    }
}

/// A finished upstream stage whose files are read through their manifest.
struct Upstream {
    stage: Stage,
    dir: PathBuf,
    manifest: Manifest,
}

impl Upstream {
    /// Opens the outputs of `stage` and checks they match `config`.
    fn open(config: &RunConfig, stage: Stage) -> Result<Self, PipelineError> {
        let dir = config.out_dir().join(stage.dir_name());
        let path = dir.join(MANIFEST);
        if !path.is_file() {
            return Err(PipelineError::MissingInput(path));
        }
        let manifest = Manifest::read(&path)?;
        let current = serde_json::to_value(config).map_err(|e| PipelineError::Stage(e.to_string()))?;
        if sections(stage).iter().any(|s| manifest.config.get(s) != current.get(s)) {
            return Err(PipelineError::StaleUpstream(stage));
        }
        Ok(Upstream { stage, dir, manifest })
    }

    fn label(&self, name: &str) -> String {
        format!("{}/{name}", self.stage.dir_name())
    }

    /// Fails on the first listed file that is absent, before anything is read.
    fn require(&self, names: &[&str]) -> Result<(), PipelineError> {
        for name in names {
            let p = self.dir.join(name);
            if !p.is_file() {
                return Err(PipelineError::MissingInput(p));
            }
        }
        Ok(())
    }

    /// Reads a file and checks it against the digest recorded when it was written.
    fn read(&self, name: &str, inputs: &mut Vec<FileDigest>) -> Result<Vec<u8>, PipelineError> {
        let path = self.dir.join(name);
        if !path.is_file() {
            return Err(PipelineError::MissingInput(path));
        }
        let data = std::fs::read(&path).map_err(|e| PipelineError::io(&path, e))?;
        let digest = FileDigest::of(self.label(name), &data);
        match self.manifest.outputs.iter().find(|d| d.path == name) {
            Some(d) if d.sha256 == digest.sha256 => {}
            Some(_) => return Err(PipelineError::malformed(&path, "contents differ from the digest in the manifest")),
            None => return Err(PipelineError::malformed(&path, "not listed in the stage manifest")),
        }
        inputs.push(digest);
        Ok(data)
    }

    fn csv<T: DeserializeOwned>(&self, name: &str, inputs: &mut Vec<FileDigest>) -> Result<Vec<T>, PipelineError> {
        let data = self.read(name, inputs)?;
        parse_csv(&self.dir.join(name), &data)
    }

    fn json<T: DeserializeOwned>(&self, name: &str, inputs: &mut Vec<FileDigest>) -> Result<T, PipelineError> {
        let data = self.read(name, inputs)?;
        serde_json::from_slice(&data).map_err(|e| PipelineError::malformed(&self.dir.join(name), e))
    }
}

fn parse_csv<T: DeserializeOwned>(path: &Path, data: &[u8]) -> Result<Vec<T>, PipelineError> {
    csv::Reader::from_reader(data)
        .deserialize()
        .map(|row| row.map_err(|e| PipelineError::malformed(path, e)))
        .collect()
}

/// Path of a configured input as it should appear in the manifest.
fn display_path(config: &RunConfig, p: &Path) -> String {
    p.strip_prefix(&config.base_dir).unwrap_or(p).to_string_lossy().replace('\\', "/")
}
