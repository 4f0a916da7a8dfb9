//! Ingestion of funding-programme tables: parsing, merging, topic filtering,
//! enrichment labels and yearly weight matrices.
//!
//! Every table row ends up either accepted or in the rejects report, so that
//! `rows_in == accepted + rejected` holds for each parsed file.

mod labels;
mod merge;
mod parse;
mod weights;

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use labels::{attach_labels, parse_labels, LabelValue, LabelledTables, ProjectLabels};
pub use merge::{filter_by_topic, merge_programmes};
pub use parse::{parse_tables, ParseOptions, TablePaths};
pub use weights::{compute_weights, days_in_year_overlap, inclusive_days, year_fractions, Apportionment, YearlyWeights};

/// Errors that abort ingestion. Row-level problems are rejects, not errors.
#[derive(Debug, Error)]
pub enum IngestError {
    #[error("input file not found: {0}")]
    MissingFile(PathBuf),
    #[error("{table} table {path}: missing required column `{column}`")]
    MissingColumn {
        table: TableKind,
        path: PathBuf,
        column: &'static str,
    },
    #[error("failed to read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("topic filter must name at least one topic")]
    EmptyTopicFilter,
    #[error("project {0} has no valid dates")]
    InvalidProject(String),
}

/// The two funding programmes whose exports share one schema.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Programme {
    H2020,
    HorizonEurope,
}

impl fmt::Display for Programme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Programme::H2020 => "H2020",
            Programme::HorizonEurope => "HorizonEurope",
        })
    }
}

impl FromStr for Programme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace(['-', '_', ' '], "").as_str() {
            "h2020" | "horizon2020" => Ok(Programme::H2020),
            "horizoneurope" | "he" | "heu" => Ok(Programme::HorizonEurope),
            other => Err(format!("unknown programme `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableKind {
    Projects,
    Participations,
    Topics,
    Labels,
}

impl fmt::Display for TableKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TableKind::Projects => "projects",
            TableKind::Participations => "participations",
            TableKind::Topics => "topics",
            TableKind::Labels => "labels",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectRecord {
    pub proj_id: String,
    pub acronym: String,
    pub title: String,
    pub start_date: NaiveDate,
    pub end_date: NaiveDate,
    pub call_id: String,
    pub objective: String,
    pub programme: Programme,
}

impl ProjectRecord {
    /// Field equality ignoring the programme the row came from.
    pub fn same_content(&self, other: &ProjectRecord) -> bool {
        self.proj_id == other.proj_id
            && self.acronym == other.acronym
            && self.title == other.title
            && self.start_date == other.start_date
            && self.end_date == other.end_date
            && self.call_id == other.call_id
            && self.objective == other.objective
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Role {
    Coordinator,
    Participant,
    AssociatedPartner,
}

impl Role {
    /// Maps CORDIS role strings. Unrecognised roles (e.g. `thirdParty`) are
    /// returned as `None` so the caller can log them.
    pub fn parse(raw: &str) -> Option<Role> {
        match raw.trim().to_ascii_lowercase().as_str() {
            "coordinator" => Some(Role::Coordinator),
            "participant" | "beneficiary" => Some(Role::Participant),
            "associatedpartner" | "associated partner" | "partner" => Some(Role::AssociatedPartner),
            _ => None,
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Coordinator => "coordinator",
            Role::Participant => "participant",
            Role::AssociatedPartner => "associatedPartner",
        })
    }
}

/// One organisation's participation in one project. Money is stored in EUR.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticipationRecord {
    pub org_id: String,
    pub proj_id: String,
    pub org_name: String,
    pub country_code: String,
    pub role: Role,
    pub total_cost: f64,
    pub net_ec_contribution: f64,
}

impl ParticipationRecord {
    /// Value of the participation in kEUR under the chosen basis.
    pub fn value_keur(&self, basis: WeightBasis) -> f64 {
        match basis {
            WeightBasis::NetEcContribution => self.net_ec_contribution / 1000.0,
            WeightBasis::TotalCost => self.total_cost / 1000.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TopicRecord {
    pub proj_id: String,
    pub topic_label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnrichmentLabel {
    pub proj_id: String,
    pub label_name: String,
    pub value: bool,
}

/// Monetary quantity used as the participation weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum WeightBasis {
    #[default]
    NetEcContribution,
    TotalCost,
}

impl fmt::Display for WeightBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WeightBasis::NetEcContribution => "netEcContribution",
            WeightBasis::TotalCost => "totalCost",
        })
    }
}

impl FromStr for WeightBasis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "netEcContribution" | "net_ec_contribution" | "net" => Ok(WeightBasis::NetEcContribution),
            "totalCost" | "total_cost" | "total" => Ok(WeightBasis::TotalCost),
            other => Err(format!("unknown weight basis `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RejectReason {
    MissingKey,
    DateOrder,
    UnparsableDate,
    MissingValue,
    InvalidValue,
    DuplicateKey,
    MalformedRow,
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RejectReason::MissingKey => "missing key",
            RejectReason::DateOrder => "date order",
            RejectReason::UnparsableDate => "unparsable date",
            RejectReason::MissingValue => "missing value",
            RejectReason::InvalidValue => "invalid value",
            RejectReason::DuplicateKey => "duplicate key",
            RejectReason::MalformedRow => "malformed row",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reject {
    pub table: TableKind,
    pub programme: Option<Programme>,
    /// 1-based line number in the source file (header is line 1).
    pub line: u64,
    pub reason: RejectReason,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowCounts {
    pub rows_in: usize,
    pub accepted: usize,
    pub rejected: usize,
}

impl RowCounts {
    fn accept(&mut self) {
        self.rows_in += 1;
        self.accepted += 1;
    }

    fn reject(&mut self) {
        self.rows_in += 1;
        self.rejected += 1;
    }

    fn add(&mut self, other: RowCounts) {
        self.rows_in += other.rows_in;
        self.accepted += other.accepted;
        self.rejected += other.rejected;
    }
}

/// The project, participation and topic tables of one or more programmes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TableSet {
    pub programmes: Vec<Programme>,
    pub projects: Vec<ProjectRecord>,
    pub participations: Vec<ParticipationRecord>,
    pub topics: Vec<TopicRecord>,
    pub rejects: Vec<Reject>,
    /// Per-table parse accounting, summed over programmes after merging.
    pub counts: BTreeMap<TableKind, RowCounts>,
    /// Non-fatal anomalies (deduplications, collisions, suspicious values).
    pub anomalies: Vec<String>,
}

impl TableSet {
    pub fn project(&self, proj_id: &str) -> Option<&ProjectRecord> {
        self.projects.iter().find(|p| p.proj_id == proj_id)
    }

    pub(crate) fn note(&mut self, message: String) {
        log::warn!("{message}");
        self.anomalies.push(message);
    }
}
