use std::collections::HashMap;

use collabnet::centrality::YearRange;
use collabnet::community::Algorithm;
use collabnet::solution_space::{FrequencyRow, Selection};
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::rows::{
    CentralityRow, EventRow, LabelMapRow, NetworkRow, PartitionRow, SelectionRow, SeriesCsvRow, TrajectoryRow,
};
use super::Upstream;
use crate::artifacts::Artifacts;
use crate::config::RunConfig;
use crate::{Outcome, PipelineError, Stage};

pub const BUNDLE_SCHEMA_VERSION: u32 = 1;

/// Everything a report needs, in one JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Bundle {
    pub schema_version: u32,
    pub algorithm: Algorithm,
    pub base_seed: u64,
    pub years: Vec<NetworkYear>,
    pub coreness_bands: Vec<YearRange>,
    pub solution_spaces: Vec<SolutionSpaceSummary>,
    pub events: Vec<EventRow>,
    pub global_labels: Vec<LabelMapRow>,
    pub series: Vec<SeriesCsvRow>,
}

/// Network size of one year and how its partition was chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct NetworkYear {
    pub year: i32,
    pub organisations: usize,
    pub collaborations: usize,
    pub total_weight: f64,
    pub edge_weight: f64,
    pub solo_weight: f64,
    pub projects: usize,
    pub selection: Option<Selection>,
    pub communities: Option<usize>,
    pub solutions: Option<usize>,
    pub modularity: Option<f64>,
    pub valid: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SolutionSpaceSummary {
    pub year: i32,
    pub trials: usize,
    pub failed: usize,
    pub entries: Vec<FrequencyRow>,
}

// The csv writer cannot flatten, so the year column is spelled out.
#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct YearFrequencyRow<'a> {
    year: i32,
    entry_key: &'a str,
    count: usize,
    first_seen_trial: usize,
    k: usize,
    valid: bool,
    modularity: f64,
    p_mean: f64,
    p_lower: f64,
    p_upper: f64,
}

impl<'a> YearFrequencyRow<'a> {
    fn new(year: i32, r: &'a FrequencyRow) -> Self {
        YearFrequencyRow {
            year,
            entry_key: &r.entry_key,
            count: r.count,
            first_seen_trial: r.first_seen_trial,
            k: r.k,
            valid: r.valid,
            modularity: r.modularity,
            p_mean: r.p_mean,
            p_lower: r.p_lower,
            p_upper: r.p_upper,
        }
    }
}

pub(super) fn run(config: &RunConfig) -> Result<Outcome, PipelineError> {
    let analysis = Upstream::open(config, Stage::Analyze)?;
    let temporal = Upstream::open(config, Stage::Temporal)?;
    analysis.require(&["network_summary.csv", "selection.csv", "coreness_ranges.json", "centrality.csv", "partitions.csv"])?;
    temporal.require(&["events.csv", "labels.csv", "series.csv"])?;

    let mut inputs = Vec::new();
    let network: Vec<NetworkRow> = analysis.csv("network_summary.csv", &mut inputs)?;
    let selections: Vec<SelectionRow> = analysis.csv("selection.csv", &mut inputs)?;
    let bands: Vec<YearRange> = analysis.json("coreness_ranges.json", &mut inputs)?;
    let centrality: Vec<CentralityRow> = analysis.csv("centrality.csv", &mut inputs)?;
    let partitions: Vec<PartitionRow> = analysis.csv("partitions.csv", &mut inputs)?;
    let mut spaces = Vec::new();
    for s in &selections {
        spaces.push(SolutionSpaceSummary {
            year: s.year,
            trials: s.trials,
            failed: s.failed,
            entries: analysis.csv(&format!("panels/{}/frequency.csv", s.year), &mut inputs)?,
        });
    }
    let events: Vec<EventRow> = temporal.csv("events.csv", &mut inputs)?;
    let labels: Vec<LabelMapRow> = temporal.csv("labels.csv", &mut inputs)?;
    let series: Vec<SeriesCsvRow> = temporal.csv("series.csv", &mut inputs)?;

    let by_year: HashMap<i32, &SelectionRow> = selections.iter().map(|s| (s.year, s)).collect();
    let years: Vec<NetworkYear> = network
        .iter()
        .map(|n| {
            let s = by_year.get(&n.year);
            NetworkYear {
                year: n.year,
                organisations: n.organisations,
                collaborations: n.collaborations,
                total_weight: n.total_weight,
                edge_weight: n.edge_weight,
                solo_weight: n.solo_weight,
                projects: n.projects,
                selection: s.map(|s| s.selection),
                communities: s.map(|s| s.k),
                solutions: s.map(|s| s.solutions),
                modularity: s.map(|s| s.modularity),
                valid: s.map(|s| s.valid),
            }
        })
        .collect();

    let community: HashMap<(i32, &str), usize> = partitions.iter().map(|p| ((p.year, p.org_id.as_str()), p.community)).collect();
    let global: HashMap<(i32, usize), &str> =
        labels.iter().map(|l| ((l.year, l.local_community), l.global_label.as_str())).collect();
    let mut trajectories: Vec<TrajectoryRow> = centrality
        .iter()
        .map(|r| {
            let c = community.get(&(r.year, r.org_id.as_str())).copied();
            TrajectoryRow {
                org_id: r.org_id.clone(),
                year: r.year,
                degree: r.degree,
                strength: r.strength,
                coreness: r.coreness,
                community: c,
                global_label: c.and_then(|c| global.get(&(r.year, c))).map(|l| l.to_string()),
            }
        })
        .collect();
    trajectories.sort_by(|a, b| (&a.org_id, a.year).cmp(&(&b.org_id, b.year)));

    let bundle = Bundle {
        schema_version: BUNDLE_SCHEMA_VERSION,
        algorithm: config.community.algorithm,
        base_seed: config.seed,
        years,
        coreness_bands: bands,
        solution_spaces: spaces,
        events,
        global_labels: labels,
        series,
    };

    let mut out = Artifacts::new();
    out.json("bundle.json", &bundle)?;
    let back: Bundle = serde_json::from_slice(out.get("bundle.json").unwrap_or_default())
        .map_err(|e| PipelineError::Stage(format!("bundle.json does not read back: {e}")))?;
    if back != bundle {
        return Err(PipelineError::Stage("bundle.json does not round-trip".into()));
    }
    out.csv(
        "network_summary.csv",
        &[
            "year", "organisations", "collaborations", "totalWeight", "edgeWeight", "soloWeight", "projects", "selection",
            "communities", "solutions", "modularity", "valid",
        ],
        &bundle.years,
    )?;
    out.csv(
        "coreness_bands.csv",
        &["year", "nodes", "degree_min", "degree_max", "strength_min", "strength_max", "coreness_min", "coreness_max"],
        &bundle.coreness_bands,
    )?;
    out.csv(
        "solution_frequencies.csv",
        &["year", "entryKey", "count", "firstSeenTrial", "k", "valid", "modularity", "pMean", "pLower", "pUpper"],
        bundle
            .solution_spaces
            .iter()
            .flat_map(|s| s.entries.iter().map(move |r| YearFrequencyRow::new(s.year, r))),
    )?;
    out.csv("series.csv", &["globalLabel", "year", "totalStrength", "memberCount"], &bundle.series)?;
    out.csv(
        "org_trajectories.csv",
        &["orgID", "year", "degree", "strength", "coreness", "community", "globalLabel"],
        &trajectories,
    )?;

    let summary = json!({
        "schemaVersion": BUNDLE_SCHEMA_VERSION,
        "years": bundle.years.len(),
        "trajectoryRows": trajectories.len(),
        "globalLabels": bundle.global_labels.iter().map(|l| l.global_label.as_str()).collect::<std::collections::BTreeSet<_>>().len(),
    });
    out.commit(&config.out_dir(), Stage::Report, config, inputs, summary, Vec::new())?;
    log::info!("report: bundle for {} years", bundle.years.len());
    Ok(Outcome::default())
}
