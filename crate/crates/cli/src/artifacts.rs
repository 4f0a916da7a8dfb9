//! In-memory staging of stage outputs, digests and the manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::{PipelineError, Stage};

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;
pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    /// Path as configured for raw inputs, relative to the output root otherwise.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

impl FileDigest {
    pub fn of(path: impl Into<String>, data: &[u8]) -> Self {
        FileDigest {
            path: path.into(),
            sha256: hex::encode(Sha256::digest(data)),
            bytes: data.len() as u64,
        }
    }
}

/// A year that could not be processed; the other years still are.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct YearFailure {
    pub year: i32,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub schema_version: u32,
    pub tool: String,
    pub stage: Stage,
    pub config: serde_json::Value,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub summary: serde_json::Value,
    pub failures: Vec<YearFailure>,
}

impl Manifest {
    pub fn read(path: &Path) -> Result<Self, PipelineError> {
        read_json(path)
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, PipelineError> {
    let bytes = fs::read(path).map_err(|e| PipelineError::io(path, e))?;
    serde_json::from_slice(&bytes).map_err(|e| PipelineError::malformed(path, e))
}

/// Reads a comma-separated file with a header into typed rows.
pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, PipelineError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| PipelineError::malformed(path, e))?;
    r.deserialize().map(|row| row.map_err(|e| PipelineError::malformed(path, e))).collect()
}

/// Files a stage is about to write, keyed by path relative to its directory.
#[derive(Debug, Default)]
pub struct Artifacts {
    files: BTreeMap<String, Vec<u8>>,
}

impl Artifacts {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn raw(&mut self, name: impl Into<String>, data: Vec<u8>) {
        self.files.insert(name.into(), data);
    }

    /// Header plus one row per record. `header` is written when `rows` is empty.
    pub fn csv<T: Serialize>(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = T>) -> Result<(), PipelineError> {
        let encode = |e: csv::Error| PipelineError::Stage(format!("encoding {name}: {e}"));
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut any = false;
        for row in rows {
            w.serialize(row).map_err(encode)?;
            any = true;
        }
        if !any {
            w.write_record(header).map_err(encode)?;
        }
        let data = w.into_inner().map_err(|e| PipelineError::Stage(format!("encoding {name}: {e}")))?;
        self.raw(name, data);
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), PipelineError> {
        let mut data = serde_json::to_vec_pretty(value).map_err(|e| PipelineError::Stage(format!("encoding {name}: {e}")))?;
        data.push(b'\n');
        self.raw(name, data);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&[u8]> {
        self.files.get(name).map(Vec::as_slice)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.keys().map(String::as_str)
    }

    fn digests(&self) -> Vec<FileDigest> {
        self.files.iter().map(|(n, d)| FileDigest::of(n.as_str(), d)).collect()
    }

    /// Writes every file plus the manifest into `root/<stage>`, replacing a
    /// previous run's directory. Files go to a scratch sibling first and are
    /// moved into place once all of them are on disk.
    pub fn commit(
        self,
        root: &Path,
        stage: Stage,
        config: &RunConfig,
        inputs: Vec<FileDigest>,
        summary: serde_json::Value,
        failures: Vec<YearFailure>,
    ) -> Result<(), PipelineError> {
        let target = root.join(stage.dir_name());
        if target.exists() && !target.join(MANIFEST).is_file() && !is_empty_dir(&target)? {
            return Err(PipelineError::ForeignDirectory(target));
        }
        let manifest = Manifest {
            schema_version: MANIFEST_SCHEMA_VERSION,
            tool: format!("collabnet {}", env!("CARGO_PKG_VERSION")),
            stage,
            config: serde_json::to_value(config).map_err(|e| PipelineError::Stage(e.to_string()))?,
            inputs,
            outputs: self.digests(),
            summary,
            failures,
        };
        let scratch = root.join(format!(".{}.partial", stage.dir_name()));
        if scratch.exists() {
            fs::remove_dir_all(&scratch).map_err(|e| PipelineError::io(&scratch, e))?;
        }
        for (name, data) in &self.files {
            write_file(&scratch.join(name), data)?;
        }
        let mut m = serde_json::to_vec_pretty(&manifest).map_err(|e| PipelineError::Stage(e.to_string()))?;
        m.push(b'\n');
        write_file(&scratch.join(MANIFEST), &m)?;
        if target.exists() {
            fs::remove_dir_all(&target).map_err(|e| PipelineError::io(&target, e))?;
        }
        fs::rename(&scratch, &target).map_err(|e| PipelineError::io(&target, e))
    }
}

fn is_empty_dir(p: &Path) -> Result<bool, PipelineError> {
    Ok(fs::read_dir(p).map_err(|e| PipelineError::io(p, e))?.next().is_none())
}

fn write_file(path: &Path, data: &[u8]) -> Result<(), PipelineError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| PipelineError::io(parent, e))?;
    }
    fs::write(path, data).map_err(|e| PipelineError::io(path, e))
}

/// Reads and digests a set of files, failing on the first missing one before
/// anything is parsed or written.
pub struct InputSet {
    entries: Vec<(String, PathBuf)>,
}

impl InputSet {
    pub fn new() -> Self {
        InputSet { entries: Vec::new() }
    }

    pub fn add(&mut self, label: impl Into<String>, path: PathBuf) -> &mut Self {
        self.entries.push((label.into(), path));
        self
    }

    pub fn check(&self) -> Result<(), PipelineError> {
        match self.entries.iter().find(|(_, p)| !p.is_file()) {
            Some((_, p)) => Err(PipelineError::MissingInput(p.clone())),
            None => Ok(()),
        }
    }

    pub fn digests(&self) -> Result<Vec<FileDigest>, PipelineError> {
        self.entries
            .iter()
            .map(|(label, p)| {
                let data = fs::read(p).map_err(|e| PipelineError::io(p, e))?;
                Ok(FileDigest::of(label.as_str(), &data))
            })
            .collect()
    }
}

impl Default for InputSet {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Row {
        a: i32,
        b: f64,
    }

    #[test]
    fn empty_tables_still_have_a_header() {
        let mut a = Artifacts::new();
        a.csv::<Row>("t.csv", &["a", "b"], []).unwrap();
        a.csv("u.csv", &["a", "b"], [Row { a: 1, b: 0.1 }]).unwrap();
        assert_eq!(a.get("t.csv").unwrap(), b"a,b\n");
        assert_eq!(a.get("u.csv").unwrap(), b"a,b\n1,0.1\n");
    }

    #[test]
    fn digest_is_sha256() {
        let d = FileDigest::of("x", b"abc");
        assert_eq!(d.sha256, "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
        assert_eq!(d.bytes, 3);
    }

    #[test]
    fn commit_replaces_previous_run_and_refuses_foreign_dirs() {
        let root = tempfile::tempdir().unwrap();
        let cfg = RunConfig::default();
        let mut a = Artifacts::new();
        a.raw("old.txt", b"1".to_vec());
        a.commit(root.path(), Stage::Ingest, &cfg, vec![], serde_json::Value::Null, vec![]).unwrap();
        let mut b = Artifacts::new();
        b.raw("sub/new.txt", b"2".to_vec());
        b.commit(root.path(), Stage::Ingest, &cfg, vec![], serde_json::Value::Null, vec![]).unwrap();
        let dir = root.path().join("ingest");
        assert!(!dir.join("old.txt").exists());
        assert_eq!(fs::read(dir.join("sub/new.txt")).unwrap(), b"2");
        let m = Manifest::read(&dir.join(MANIFEST)).unwrap();
        assert_eq!(m.outputs.len(), 1);
        assert_eq!(m.outputs[0].path, "sub/new.txt");

        let foreign = root.path().join("analyze");
        fs::create_dir_all(&foreign).unwrap();
        fs::write(foreign.join("mine.txt"), "keep").unwrap();
        let c = Artifacts::new();
        let err = c.commit(root.path(), Stage::Analyze, &cfg, vec![], serde_json::Value::Null, vec![]);
        assert!(matches!(err, Err(PipelineError::ForeignDirectory(_))));
        assert!(foreign.join("mine.txt").exists());
    }

    #[test]
    fn missing_input_is_reported_by_path() {
        let dir = tempfile::tempdir().unwrap();
        let present = dir.path().join("a.csv");
        fs::write(&present, "x").unwrap();
        let mut s = InputSet::new();
        s.add("a", present).add("b", dir.path().join("b.csv"));
        match s.check() {
            Err(PipelineError::MissingInput(p)) => assert!(p.ends_with("b.csv")),
            other => panic!("{other:?}"),
        }
    }
}
