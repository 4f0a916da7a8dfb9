//! Row types of the delimited exports. Field order is column order.

use collabnet::community::Algorithm;
use collabnet::ingest::{Programme, Reject, RejectReason, Role, TableKind};
use collabnet::solution_space::Selection;
use collabnet::temporal::{EventKind, LabelLogEntry, LabelOrigin, LineageEvent};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectRow {
    #[serde(rename = "projID")]
    pub proj_id: String,
    pub acronym: String,
    pub title: String,
    #[serde(rename = "startDate")]
    pub start_date: String,
    #[serde(rename = "endDate")]
    pub end_date: String,
    #[serde(rename = "callID")]
    pub call_id: String,
    #[serde(rename = "objectiveText")]
    pub objective: String,
    pub programme: Programme,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticipationRow {
    #[serde(rename = "projID")]
    pub proj_id: String,
    #[serde(rename = "orgID")]
    pub org_id: String,
    #[serde(rename = "orgName")]
    pub org_name: String,
    #[serde(rename = "countryCode")]
    pub country_code: String,
    pub role: Role,
    #[serde(rename = "totalCost")]
    pub total_cost: f64,
    #[serde(rename = "netEcContribution")]
    pub net_ec_contribution: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicRow {
    #[serde(rename = "projID")]
    pub proj_id: String,
    #[serde(rename = "topicLabel")]
    pub topic_label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrganisationRow {
    #[serde(rename = "orgID")]
    pub org_id: String,
    #[serde(rename = "orgName")]
    pub org_name: String,
    #[serde(rename = "countryCode")]
    pub country_code: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightRow {
    pub year: i32,
    #[serde(rename = "orgID")]
    pub org_id: String,
    #[serde(rename = "projID")]
    pub proj_id: String,
    pub weight: f64,
}

/// One calendar year of the weight matrices, including empty ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YearRow {
    pub year: i32,
    pub entries: usize,
    pub projects: usize,
    pub organisations: usize,
    #[serde(rename = "totalWeight")]
    pub total_weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectRow {
    pub table: TableKind,
    pub programme: Option<Programme>,
    pub line: u64,
    pub reason: RejectReason,
    pub detail: String,
}

impl From<&Reject> for RejectRow {
    fn from(r: &Reject) -> Self {
        RejectRow {
            table: r.table,
            programme: r.programme,
            line: r.line,
            reason: r.reason,
            detail: r.detail.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelRow {
    #[serde(rename = "projID")]
    pub proj_id: String,
    pub label: String,
    pub value: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentralityRow {
    pub year: i32,
    #[serde(rename = "orgID")]
    pub org_id: String,
    pub degree: usize,
    pub strength: f64,
    pub coreness: usize,
    pub participations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionRow {
    pub year: i32,
    #[serde(rename = "orgID")]
    pub org_id: String,
    pub community: usize,
}

/// How each year's final partition was chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionRow {
    pub year: i32,
    pub algorithm: Algorithm,
    #[serde(rename = "baseSeed")]
    pub base_seed: u64,
    pub selection: Selection,
    pub k: usize,
    pub solutions: usize,
    pub trials: usize,
    pub failed: usize,
    pub valid: bool,
    pub modularity: f64,
    #[serde(rename = "partitionKey")]
    pub partition_key: String,
}

/// Size of one yearly network: organisations, collaborations and weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkRow {
    pub year: i32,
    pub organisations: usize,
    pub collaborations: usize,
    #[serde(rename = "totalWeight")]
    pub total_weight: f64,
    #[serde(rename = "edgeWeight")]
    pub edge_weight: f64,
    #[serde(rename = "soloWeight")]
    pub solo_weight: f64,
    pub projects: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRow {
    #[serde(rename = "fromYear")]
    pub from_year: i32,
    #[serde(rename = "fromCommunity")]
    pub from_community: usize,
    #[serde(rename = "toCommunity")]
    pub to_community: usize,
    pub kind: EventKind,
    pub overlap: usize,
    pub jaccard: f64,
}

impl From<&LineageEvent> for EventRow {
    fn from(e: &LineageEvent) -> Self {
        EventRow {
            from_year: e.from_year,
            from_community: e.from_community,
            to_community: e.to_community,
            kind: e.kind,
            overlap: e.overlap,
            jaccard: e.jaccard,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelMapRow {
    pub year: i32,
    #[serde(rename = "localCommunity")]
    pub local_community: usize,
    #[serde(rename = "globalLabel")]
    pub global_label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelLogRow {
    pub year: i32,
    pub community: usize,
    pub label: String,
    pub origin: String,
    #[serde(rename = "fromYear")]
    pub from_year: Option<i32>,
    #[serde(rename = "fromCommunity")]
    pub from_community: Option<usize>,
}

impl From<&LabelLogEntry> for LabelLogRow {
    fn from(e: &LabelLogEntry) -> Self {
        let (origin, from_year, from_community) = match &e.origin {
            LabelOrigin::Created => ("created".to_string(), None, None),
            LabelOrigin::Inherited {
                from_year,
                from_community,
                kind,
            } => (kind.to_string(), Some(*from_year), Some(*from_community)),
        };
        LabelLogRow {
            year: e.year,
            community: e.community,
            label: e.label.clone(),
            origin,
            from_year,
            from_community,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesCsvRow {
    #[serde(rename = "globalLabel")]
    pub global_label: String,
    pub year: i32,
    #[serde(rename = "totalStrength")]
    pub total_strength: f64,
    #[serde(rename = "memberCount")]
    pub member_count: usize,
}

/// One organisation in one year with its position and community.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    #[serde(rename = "orgID")]
    pub org_id: String,
    pub year: i32,
    pub degree: usize,
    pub strength: f64,
    pub coreness: usize,
    pub community: Option<usize>,
    #[serde(rename = "globalLabel")]
    pub global_label: Option<String>,
}
