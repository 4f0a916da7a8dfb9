//! Run configuration, read from one TOML file.

use std::path::{Path, PathBuf};

use collabnet::community::{Algorithm, DetectParams};
use collabnet::graph::ProjectionRule;
use collabnet::ingest::{Apportionment, Programme, TablePaths, WeightBasis};
use collabnet::solution_space::ExplorationConfig;
use serde::{Deserialize, Serialize};

use crate::PipelineError;

/// Everything a run depends on besides the input files.
///
/// `workers` and `out` are execution details: they are accepted from the file
/// but left out when the config is embedded in a manifest, so moving the
/// output directory or changing the thread count never changes an artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    #[serde(skip_serializing)]
    pub workers: usize,
    #[serde(skip_serializing)]
    pub out: PathBuf,
    pub input: InputConfig,
    pub ingest: IngestConfig,
    pub graph: GraphConfig,
    pub community: CommunityConfig,
    pub exploration: ExplorationConfig,
    pub temporal: TemporalConfig,
    /// Directory relative input paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            workers: 0,
            out: PathBuf::from("out"),
            input: InputConfig::default(),
            ingest: IngestConfig::default(),
            graph: GraphConfig::default(),
            community: CommunityConfig::default(),
            exploration: ExplorationConfig::default(),
            temporal: TemporalConfig::default(),
            base_dir: PathBuf::from("."),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InputConfig {
    pub delimiter: char,
    pub programmes: Vec<ProgrammeInput>,
    /// Optional `projID,label,value` file of Boolean project labels.
    pub labels: Option<PathBuf>,
}

impl Default for InputConfig {
    fn default() -> Self {
        InputConfig {
            delimiter: ';',
            programmes: Vec::new(),
            labels: None,
        }
    }
}

/// One programme's tables. `dir` supplies the CORDIS file names
/// (`project.csv`, `organization.csv`, `euroSciVoc.csv`); explicit paths win.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProgrammeInput {
    pub programme: Programme,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub projects: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub participations: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topics: Option<PathBuf>,
}

impl ProgrammeInput {
    pub fn paths(&self, base: &Path) -> Result<TablePaths, PipelineError> {
        let pick = |explicit: &Option<PathBuf>, default_name: &str| -> Result<PathBuf, PipelineError> {
            match (explicit, &self.dir) {
                (Some(p), _) => Ok(base.join(p)),
                (None, Some(d)) => Ok(base.join(d).join(default_name)),
                (None, None) => Err(PipelineError::Config(format!(
                    "programme {} needs `dir` or an explicit path for every table",
                    self.programme
                ))),
            }
        };
        Ok(TablePaths {
            projects: pick(&self.projects, "project.csv")?,
            participations: pick(&self.participations, "organization.csv")?,
            topics: pick(&self.topics, "euroSciVoc.csv")?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IngestConfig {
    /// Topic labels to keep; empty keeps every project.
    pub topics: Vec<String>,
    pub basis: WeightBasis,
    pub apportionment: Apportionment,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GraphConfig {
    pub projection: ProjectionRule,
    /// Restrict every year to projects whose label is true.
    pub split_label: Option<String>,
    pub first_year: Option<i32>,
    pub last_year: Option<i32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CommunityConfig {
    pub algorithm: Algorithm,
    pub resolution: f64,
    pub walk_length: usize,
    pub max_iterations: usize,
}

impl Default for CommunityConfig {
    fn default() -> Self {
        let p = DetectParams::default();
        CommunityConfig {
            algorithm: Algorithm::Walktrap,
            resolution: p.resolution,
            walk_length: p.walk_length,
            max_iterations: p.max_iterations,
        }
    }
}

impl CommunityConfig {
    pub fn params(&self) -> DetectParams {
        DetectParams {
            resolution: self.resolution,
            walk_length: self.walk_length,
            max_iterations: self.max_iterations,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TemporalConfig {
    pub theta: f64,
    /// Number of global labels kept in the series export; 0 keeps all.
    pub top_n: usize,
}

impl Default for TemporalConfig {
    fn default() -> Self {
        TemporalConfig { theta: 0.5, top_n: 6 }
    }
}

/// Values given on the command line; they replace the file's values.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self, PipelineError> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))?;
        cfg.base_dir = base_dir.to_path_buf();
        Ok(cfg)
    }

    /// Reads `path`; relative paths inside it resolve against its directory.
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        if !path.is_file() {
            return Err(PipelineError::MissingInput(path.to_path_buf()));
        }
        let text = std::fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_toml(&text, &base)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(w) = o.workers {
            self.workers = w;
        }
        if let Some(out) = &o.out {
            // Flag paths are relative to the working directory, not the file.
            self.out = std::env::current_dir().map(|d| d.join(out)).unwrap_or_else(|_| out.clone());
        }
    }

    pub fn out_dir(&self) -> PathBuf {
        self.base_dir.join(&self.out)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        self.base_dir.join(p)
    }

    pub fn delimiter(&self) -> Result<u8, PipelineError> {
        u8::try_from(self.input.delimiter)
            .ok()
            .filter(u8::is_ascii)
            .ok_or_else(|| PipelineError::Config(format!("delimiter {:?} is not a single ASCII character", self.input.delimiter)))
    }

    pub fn check(&self) -> Result<(), PipelineError> {
        self.delimiter()?;
        self.exploration.check().map_err(|e| PipelineError::Config(e.to_string()))?;
        if !(self.temporal.theta > 0.0 && self.temporal.theta < 1.0) {
            return Err(PipelineError::Config("temporal.theta must lie strictly between 0 and 1".into()));
        }
        if self.community.walk_length == 0 || self.community.max_iterations == 0 {
            return Err(PipelineError::Config("community.walk_length and max_iterations must be positive".into()));
        }
        if let (Some(a), Some(b)) = (self.graph.first_year, self.graph.last_year) {
            if a > b {
                return Err(PipelineError::Config(format!("graph.first_year {a} is after last_year {b}")));
            }
        }
        Ok(())
    }
}
