use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::parse::{open_reader, Columns};
use super::{EnrichmentLabel, IngestError, Reject, RejectReason, RowCounts, TableKind, TableSet};

/// Tri-state value of a Boolean project label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelValue {
    True,
    False,
    Unknown,
}

impl From<Option<bool>> for LabelValue {
    fn from(v: Option<bool>) -> Self {
        match v {
            Some(true) => LabelValue::True,
            Some(false) => LabelValue::False,
            None => LabelValue::Unknown,
        }
    }
}

/// Boolean attributes per project; absent entries read as [`LabelValue::Unknown`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectLabels {
    values: BTreeMap<String, BTreeMap<String, bool>>,
    names: BTreeSet<String>,
}

impl ProjectLabels {
    pub fn get(&self, proj_id: &str, label: &str) -> LabelValue {
        self.values.get(proj_id).and_then(|m| m.get(label)).copied().into()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.names.iter().map(String::as_str)
    }

    pub fn set(&mut self, proj_id: &str, label: &str, value: bool) {
        self.names.insert(label.to_string());
        self.values
            .entry(proj_id.to_string())
            .or_default()
            .insert(label.to_string(), value);
    }

    /// Rows as `(projID, label, value)` in sorted order.
    pub fn rows(&self) -> impl Iterator<Item = (&str, &str, bool)> {
        self.values
            .iter()
            .flat_map(|(p, m)| m.iter().map(move |(l, v)| (p.as_str(), l.as_str(), *v)))
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LabelledTables {
    pub tables: TableSet,
    pub labels: ProjectLabels,
}

/// Reads a `projID,label,value` file (`value` in `true`/`false`).
pub fn parse_labels(path: &Path, delimiter: u8) -> Result<(Vec<EnrichmentLabel>, Vec<Reject>, RowCounts), IngestError> {
    const PROJ: &[&str] = &["projID"];
    const LABEL: &[&str] = &["label"];
    const VALUE: &[&str] = &["value"];
    let mut reader = open_reader(path, delimiter)?;
    let headers = reader
        .headers()
        .map_err(|source| IngestError::Read {
            path: path.to_path_buf(),
            source,
        })?
        .clone();
    let cols = Columns::resolve(&headers, TableKind::Labels, path, &[PROJ, LABEL, VALUE], &[])?;
    let mut labels = Vec::new();
    let mut rejects = Vec::new();
    let mut counts = RowCounts::default();
    let mut seen = HashSet::new();
    for (i, record) in reader.records().enumerate() {
        let line = i as u64 + 2;
        let mut reject = |reason, detail: String| {
            counts.reject();
            rejects.push(Reject {
                table: TableKind::Labels,
                programme: None,
                line,
                reason,
                detail,
            });
        };
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                reject(RejectReason::MalformedRow, e.to_string());
                continue;
            }
        };
        let proj_id = cols.get(&record, PROJ);
        let label = cols.get(&record, LABEL);
        if proj_id.is_empty() || label.is_empty() {
            reject(RejectReason::MissingKey, "empty projID or label".into());
            continue;
        }
        let value = match cols.get(&record, VALUE).to_ascii_lowercase().as_str() {
            "true" => true,
            "false" => false,
            other => {
                reject(RejectReason::InvalidValue, format!("{proj_id}/{label}: `{other}`"));
                continue;
            }
        };
        if !seen.insert((proj_id.to_string(), label.to_string())) {
            reject(RejectReason::DuplicateKey, format!("{proj_id}/{label}"));
            continue;
        }
        counts.accept();
        labels.push(EnrichmentLabel {
            proj_id: proj_id.to_string(),
            label_name: label.to_string(),
            value,
        });
    }
    Ok((labels, rejects, counts))
}

/// Joins enrichment labels onto the projects of `tables`. Labels for unknown
/// projects are logged and skipped.
pub fn attach_labels(tables: TableSet, labels: &[EnrichmentLabel]) -> LabelledTables {
    let mut out = LabelledTables {
        tables,
        labels: ProjectLabels::default(),
    };
    let known: HashSet<String> = out.tables.projects.iter().map(|p| p.proj_id.clone()).collect();
    for label in labels {
        out.labels.names.insert(label.label_name.clone());
        if known.contains(&label.proj_id) {
            out.labels.set(&label.proj_id, &label.label_name, label.value);
        } else {
            out.tables.note(format!(
                "label `{}` references unknown project {}; skipped",
                label.label_name, label.proj_id
            ));
        }
    }
    out
}
