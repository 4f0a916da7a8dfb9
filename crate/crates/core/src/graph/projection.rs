use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{Graph, GraphBuilder, GraphError};
use crate::ingest::{LabelValue, ParticipationRecord, ProjectLabels, YearlyWeights};
use crate::scalar::Weight;

/// How the organisation × project matrix becomes organisation × organisation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProjectionRule {
    /// Each project's value is shared among participant pairs in proportion to
    /// `w_i * w_j`; the sum of edge weights equals the project's value.
    #[default]
    ProductSplit,
    /// Off-diagonal entries of `WᵀW`. Not value-conserving.
    RawGram,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrgInfo {
    pub name: String,
    pub country: String,
}

/// Display attributes per organisation, first occurrence wins.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OrgDirectory(pub BTreeMap<String, OrgInfo>);

impl OrgDirectory {
    pub fn from_participations<'a>(rows: impl IntoIterator<Item = &'a ParticipationRecord>) -> Self {
        let mut map = BTreeMap::new();
        for r in rows {
            map.entry(r.org_id.clone()).or_insert_with(|| OrgInfo {
                name: r.org_name.clone(),
                country: r.country_code.clone(),
            });
        }
        OrgDirectory(map)
    }
}

#[derive(Debug, Clone)]
pub struct Projection<W> {
    pub graph: Graph<W>,
    pub warnings: Vec<String>,
}

/// Projects one year's weight matrix onto the organisations.
///
/// Nodes are the organisations with a positive entry, stored in id order.
/// Under [`ProjectionRule::ProductSplit`] a project with positive weights
/// `w_1..w_k` (k ≥ 2) adds `w_i w_j / Σ_{a<b} w_a w_b · Σ w` to each pair;
/// a project with a single positively weighted participant adds its value to
/// that node's solo weight instead. Edge weight plus solo weight therefore
/// equals the matrix total.
pub fn project_one_mode<W: Weight>(
    matrix: &YearlyWeights<W>,
    directory: &OrgDirectory,
    rule: ProjectionRule,
) -> Result<Projection<W>, GraphError> {
    if matrix.is_empty() {
        return Err(GraphError::EmptyMatrix(matrix.year));
    }
    let mut warnings = Vec::new();
    let mut builder = GraphBuilder::new(matrix.year);
    let counts = matrix.participation_counts();
    for org in matrix.active_orgs() {
        let node = builder.node_mut(org);
        if let Some(info) = directory.0.get(org) {
            node.name = info.name.clone();
            node.country = info.country.clone();
        }
        node.participations = counts.get(org).copied().unwrap_or(0);
    }
    for (proj, participants) in matrix.by_project() {
        let positive: Vec<(&str, W)> = participants.iter().copied().filter(|(_, w)| *w > W::zero()).collect();
        match positive.len() {
            0 => {
                if participants.len() >= 2 {
                    warnings.push(format!("{}: project {proj} has only zero-weight participants; no edges", matrix.year));
                }
            }
            1 => {
                let (org, w) = positive[0];
                let node = builder.node_mut(org);
                node.solo_weight = node.solo_weight + w;
            }
            _ => add_project_edges(&mut builder, &positive, rule)?,
        }
    }
    for w in &warnings {
        log::warn!("{w}");
    }
    Ok(Projection {
        graph: builder.build(),
        warnings,
    })
}

fn add_project_edges<W: Weight>(builder: &mut GraphBuilder<W>, members: &[(&str, W)], rule: ProjectionRule) -> Result<(), GraphError> {
    let mut pair_products = W::zero();
    for (i, &(_, wi)) in members.iter().enumerate() {
        for &(_, wj) in &members[i + 1..] {
            pair_products = pair_products + wi * wj;
        }
    }
    let total: W = members.iter().map(|&(_, w)| w).sum();
    for (i, &(oi, wi)) in members.iter().enumerate() {
        for &(oj, wj) in &members[i + 1..] {
            let weight = match rule {
                ProjectionRule::ProductSplit => wi * wj / pair_products * total,
                ProjectionRule::RawGram => wi * wj,
            };
            // Underflow to zero is possible for extreme weight ratios.
            if weight > W::zero() {
                builder.add_edge(oi, oj, weight)?;
            }
        }
    }
    Ok(())
}

/// A weight matrix divided by one Boolean project label.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelSplit<W> {
    pub when_true: YearlyWeights<W>,
    pub when_false: YearlyWeights<W>,
    /// Distinct projects with entries whose label is unknown (excluded from both).
    pub unknown_projects: usize,
}

pub fn split_by_label<W: Weight>(matrix: &YearlyWeights<W>, labels: &ProjectLabels, label: &str) -> LabelSplit<W> {
    let unknown: BTreeSet<&str> = matrix
        .entries
        .keys()
        .map(|(_, p)| p.as_str())
        .filter(|p| labels.get(p, label) == LabelValue::Unknown)
        .collect();
    LabelSplit {
        when_true: matrix.retain_projects(|p| labels.get(p, label) == LabelValue::True),
        when_false: matrix.retain_projects(|p| labels.get(p, label) == LabelValue::False),
        unknown_projects: unknown.len(),
    }
}
