//! Plot-ready tables derived from a solution space.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{beta_estimate, ExplorationConfig, SolutionEntry, SolutionSpace};
use crate::community::{similarity, CommunityError};

/// Credible band of one solution after `trial` successful trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BandRow {
    pub trial: usize,
    pub entry_key: String,
    pub p_mean: f64,
    pub p_lower: f64,
    pub p_upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FrequencyRow {
    pub entry_key: String,
    pub count: usize,
    pub first_seen_trial: usize,
    pub k: usize,
    pub valid: bool,
    pub modularity: f64,
    pub p_mean: f64,
    pub p_lower: f64,
    pub p_upper: f64,
}

impl From<&SolutionEntry> for FrequencyRow {
    fn from(e: &SolutionEntry) -> Self {
        FrequencyRow {
            entry_key: e.canonical_key.clone(),
            count: e.count,
            first_seen_trial: e.first_seen_trial,
            k: e.partition.k,
            valid: e.valid,
            modularity: e.modularity,
            p_mean: e.estimate.p_mean,
            p_lower: e.estimate.p_lower,
            p_upper: e.estimate.p_upper,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SizeRow {
    pub entry_key: String,
    pub community: usize,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SimilarityRow {
    pub key_a: String,
    pub key_b: String,
    pub ari: f64,
    pub nmi: f64,
}

/// Replays the trial log: after every successful trial, one row per solution
/// seen so far with its posterior band at that point.
pub fn confidence_bands(space: &SolutionSpace, config: &ExplorationConfig) -> Vec<BandRow> {
    let mut counts: Vec<(String, usize)> = Vec::new();
    let mut index: HashMap<&str, usize> = HashMap::new();
    let mut rows = Vec::new();
    let mut t = 0;
    for record in &space.log {
        let Some(key) = record.canonical_key.as_deref() else { continue };
        t += 1;
        match index.get(key) {
            Some(&i) => counts[i].1 += 1,
            None => {
                index.insert(key, counts.len());
                counts.push((key.to_string(), 1));
            }
        }
        for (key, c) in &counts {
            let e = beta_estimate(*c, t, config.prior_alpha, config.prior_beta, config.credible_level);
            rows.push(BandRow {
                trial: t,
                entry_key: key.clone(),
                p_mean: e.p_mean,
                p_lower: e.p_lower,
                p_upper: e.p_upper,
            });
        }
    }
    rows
}

/// Community sizes of every solution, largest first.
pub fn size_distribution(space: &SolutionSpace) -> Vec<SizeRow> {
    let mut rows = Vec::new();
    for e in &space.entries {
        let mut sizes = e.partition.sizes();
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        rows.extend(sizes.into_iter().enumerate().map(|(community, size)| SizeRow {
            entry_key: e.canonical_key.clone(),
            community,
            size,
        }));
    }
    rows
}

/// Pairwise ARI/NMI between all solutions (full square, including the diagonal).
pub fn similarity_matrix(space: &SolutionSpace) -> Result<Vec<SimilarityRow>, CommunityError> {
    let mut rows = Vec::with_capacity(space.len() * space.len());
    for a in &space.entries {
        for b in &space.entries {
            let s = similarity(&a.partition, &b.partition)?;
            rows.push(SimilarityRow {
                key_a: a.canonical_key.clone(),
                key_b: b.canonical_key.clone(),
                ari: s.ari,
                nmi: s.nmi,
            });
        }
    }
    Ok(rows)
}
