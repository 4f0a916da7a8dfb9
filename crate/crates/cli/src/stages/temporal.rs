use std::collections::BTreeMap;

use collabnet::centrality::CentralityRecord;
use collabnet::community::Partition;
use collabnet::temporal::{community_series, consecutive, event_matrix, track, EventKind};
use serde_json::json;

use super::rows::{CentralityRow, EventRow, LabelLogRow, LabelMapRow, PartitionRow, SelectionRow, SeriesCsvRow};
use super::Upstream;
use crate::artifacts::Artifacts;
use crate::config::RunConfig;
use crate::{Outcome, PipelineError, Stage};

pub(super) fn run(config: &RunConfig) -> Result<Outcome, PipelineError> {
    let up = Upstream::open(config, Stage::Analyze)?;
    up.require(&["selection.csv", "partitions.csv", "centrality.csv"])?;
    let mut inputs = Vec::new();
    let selections: Vec<SelectionRow> = up.csv("selection.csv", &mut inputs)?;
    let rows: Vec<PartitionRow> = up.csv("partitions.csv", &mut inputs)?;
    let centrality: Vec<CentralityRow> = up.csv("centrality.csv", &mut inputs)?;
    let partitions = rebuild_partitions(&up, &selections, rows)?;
    // A year that failed analysis has no partition and surfaces as a gap.
    let lineage = track(&partitions, config.temporal.theta)?;
    let sorted = consecutive(&partitions)?;

    let mut out = Artifacts::new();
    let event_header = ["fromYear", "fromCommunity", "toCommunity", "kind", "overlap", "jaccard"];
    out.csv("events.csv", &event_header, lineage.events.iter().map(EventRow::from))?;
    out.csv(
        "event_matrix.csv",
        &event_header,
        sorted
            .windows(2)
            .flat_map(|w| event_matrix(w[0], w[1], config.temporal.theta))
            .map(|e| EventRow::from(&e)),
    )?;
    out.csv(
        "labels.csv",
        &["year", "localCommunity", "globalLabel"],
        lineage.labels.labels.iter().map(|(&(year, c), l)| LabelMapRow {
            year,
            local_community: c,
            global_label: l.clone(),
        }),
    )?;
    out.csv(
        "label_log.csv",
        &["year", "community", "label", "origin", "fromYear", "fromCommunity"],
        lineage.labels.log.iter().map(LabelLogRow::from),
    )?;
    let records: Vec<CentralityRecord<f64>> = centrality
        .into_iter()
        .map(|r| CentralityRecord {
            year: r.year,
            org_id: r.org_id,
            degree: r.degree,
            strength: r.strength,
            coreness: r.coreness,
            participations: r.participations,
        })
        .collect();
    let top_n = (config.temporal.top_n > 0).then_some(config.temporal.top_n);
    let series = community_series(&lineage.labels, &partitions, &records, top_n);
    out.csv(
        "series.csv",
        &["globalLabel", "year", "totalStrength", "memberCount"],
        series.into_iter().map(|s| SeriesCsvRow {
            global_label: s.global_label,
            year: s.year,
            total_strength: s.total_strength,
            member_count: s.member_count,
        }),
    )?;

    let mut kinds: BTreeMap<EventKind, usize> = BTreeMap::new();
    for e in &lineage.events {
        *kinds.entry(e.kind).or_default() += 1;
    }
    let summary = json!({
        "years": partitions.iter().map(|p| p.year).collect::<Vec<_>>(),
        "theta": config.temporal.theta,
        "events": kinds.iter().map(|(k, n)| (k.to_string(), json!(n))).collect::<serde_json::Map<_, _>>(),
        "globalLabels": lineage.labels.label_names().len(),
        "timelinesConnected": lineage.labels.timelines_connected(),
    });
    out.commit(&config.out_dir(), Stage::Temporal, config, inputs, summary, Vec::new())?;
    log::info!("temporal: {} events, {} global labels", lineage.events.len(), lineage.labels.label_names().len());
    Ok(Outcome::default())
}

/// Partitions per year from the exported rows, checked against the keys
/// recorded when they were selected.
fn rebuild_partitions(up: &Upstream, selections: &[SelectionRow], rows: Vec<PartitionRow>) -> Result<Vec<Partition>, PipelineError> {
    let path = up.dir.join("partitions.csv");
    let mut by_year: BTreeMap<i32, Vec<PartitionRow>> = BTreeMap::new();
    for r in rows {
        by_year.entry(r.year).or_default().push(r);
    }
    let mut out = Vec::new();
    for s in selections {
        let members = by_year.remove(&s.year).unwrap_or_default();
        let p = Partition::from_labels(
            s.year,
            members.iter().map(|r| r.org_id.as_str()),
            members.iter().map(|r| r.community),
            s.algorithm,
            s.base_seed,
        );
        if p.canonical_key != s.partition_key {
            return Err(PipelineError::malformed(&path, format!("partition of {} does not match its recorded key", s.year)));
        }
        out.push(p);
    }
    if let Some(year) = by_year.keys().next() {
        return Err(PipelineError::malformed(&path, format!("rows for {year} have no selection record")));
    }
    out.sort_by_key(|p| p.year);
    Ok(out)
}
