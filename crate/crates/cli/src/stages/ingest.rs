use std::collections::{BTreeMap, BTreeSet};

use collabnet::graph::OrgDirectory;
use collabnet::ingest::{
    attach_labels, compute_weights, filter_by_topic, merge_programmes, parse_labels, parse_tables, ParseOptions, TableKind,
    TableSet, YearlyWeights,
};
use serde_json::json;

use super::display_path;
use super::rows::{LabelRow, OrganisationRow, ParticipationRow, ProjectRow, RejectRow, TopicRow, WeightRow, YearRow};
use crate::artifacts::{Artifacts, InputSet};
use crate::config::RunConfig;
use crate::{Outcome, PipelineError, Stage};

pub(super) fn run(config: &RunConfig) -> Result<Outcome, PipelineError> {
    if config.input.programmes.is_empty() {
        return Err(PipelineError::Config("input.programmes is empty".into()));
    }
    let delimiter = config.delimiter()?;
    let mut inputs = InputSet::new();
    let mut sources = Vec::new();
    for p in &config.input.programmes {
        let paths = p.paths(&config.base_dir)?;
        for f in [&paths.projects, &paths.participations, &paths.topics] {
            inputs.add(display_path(config, f), f.clone());
        }
        sources.push((p.programme, paths));
    }
    let labels_path = config.input.labels.as_ref().map(|p| config.resolve(p));
    if let Some(p) = &labels_path {
        inputs.add(display_path(config, p), p.clone());
    }
    inputs.check()?;
    let digests = inputs.digests()?;

    let mut merged: Option<TableSet> = None;
    for (programme, paths) in &sources {
        let t = parse_tables(paths, *programme, ParseOptions { delimiter })?;
        merged = Some(match merged {
            Some(m) => merge_programmes(m, t),
            None => t,
        });
    }
    let merged = merged.unwrap_or_default();
    let parsed_counts = merged.counts.clone();
    let topics: BTreeSet<String> = config.ingest.topics.iter().cloned().collect();
    let mut tables = if topics.is_empty() { merged } else { filter_by_topic(&merged, &topics)? };

    let mut label_rows = Vec::new();
    if let Some(p) = &labels_path {
        let (labels, rejects, counts) = parse_labels(p, delimiter)?;
        tables.rejects.extend(rejects);
        tables.counts.insert(TableKind::Labels, counts);
        let labelled = attach_labels(tables, &labels);
        label_rows = labelled
            .labels
            .rows()
            .map(|(proj, label, value)| LabelRow {
                proj_id: proj.into(),
                label: label.into(),
                value,
            })
            .collect();
        tables = labelled.tables;
    }

    let (matrices, warnings) = compute_weights::<f64>(&tables, config.ingest.basis, config.ingest.apportionment)?;

    let mut out = Artifacts::new();
    write_tables(&mut out, &tables)?;
    out.csv(
        "weights.csv",
        &["year", "orgID", "projID", "weight"],
        matrices.iter().flat_map(|m| {
            m.entries.iter().map(move |((org, proj), w)| WeightRow {
                year: m.year,
                org_id: org.clone(),
                proj_id: proj.clone(),
                weight: *w,
            })
        }),
    )?;
    out.csv(
        "years.csv",
        &["year", "entries", "projects", "organisations", "totalWeight"],
        matrices.iter().map(year_row),
    )?;
    if labels_path.is_some() {
        out.csv("labels.csv", &["projID", "label", "value"], label_rows)?;
    }

    let participation_total: f64 = tables.participations.iter().map(|p| p.value_keur(config.ingest.basis)).sum();
    let weight_total: f64 = matrices.iter().map(YearlyWeights::total).sum();
    let summary = json!({
        "programmes": tables.programmes,
        "basis": config.ingest.basis,
        "apportionment": config.ingest.apportionment,
        "topicFilter": config.ingest.topics,
        "parsed": counts_json(&parsed_counts),
        "counts": counts_json(&tables.counts),
        "kept": {
            "projects": tables.projects.len(),
            "participations": tables.participations.len(),
            "topics": tables.topics.len(),
            "organisations": OrgDirectory::from_participations(&tables.participations).0.len(),
        },
        "rejects": tables.rejects.len(),
        "years": matrices.iter().map(|m| m.year).collect::<Vec<_>>(),
        "participationValue": participation_total,
        "apportionedValue": weight_total,
        "anomalies": tables.anomalies,
        "warnings": warnings,
    });
    out.commit(&config.out_dir(), Stage::Ingest, config, digests, summary, Vec::new())?;
    log::info!(
        "ingest: {} projects, {} participations, {} yearly matrices",
        tables.projects.len(),
        tables.participations.len(),
        matrices.len()
    );
    Ok(Outcome::default())
}

fn counts_json(counts: &BTreeMap<TableKind, collabnet::ingest::RowCounts>) -> serde_json::Value {
    counts.iter().map(|(k, c)| (k.to_string(), json!(c))).collect::<serde_json::Map<_, _>>().into()
}

fn year_row(m: &YearlyWeights<f64>) -> YearRow {
    YearRow {
        year: m.year,
        entries: m.len(),
        projects: m.by_project().len(),
        organisations: m.active_orgs().len(),
        total_weight: m.total(),
    }
}

fn write_tables(out: &mut Artifacts, t: &TableSet) -> Result<(), PipelineError> {
    out.csv(
        "projects.csv",
        &["projID", "acronym", "title", "startDate", "endDate", "callID", "objectiveText", "programme"],
        t.projects.iter().map(|p| ProjectRow {
            proj_id: p.proj_id.clone(),
            acronym: p.acronym.clone(),
            title: p.title.clone(),
            start_date: p.start_date.to_string(),
            end_date: p.end_date.to_string(),
            call_id: p.call_id.clone(),
            objective: p.objective.clone(),
            programme: p.programme,
        }),
    )?;
    out.csv(
        "participations.csv",
        &["projID", "orgID", "orgName", "countryCode", "role", "totalCost", "netEcContribution"],
        t.participations.iter().map(|p| ParticipationRow {
            proj_id: p.proj_id.clone(),
            org_id: p.org_id.clone(),
            org_name: p.org_name.clone(),
            country_code: p.country_code.clone(),
            role: p.role,
            total_cost: p.total_cost,
            net_ec_contribution: p.net_ec_contribution,
        }),
    )?;
    out.csv(
        "topics.csv",
        &["projID", "topicLabel"],
        t.topics.iter().map(|r| TopicRow {
            proj_id: r.proj_id.clone(),
            topic_label: r.topic_label.clone(),
        }),
    )?;
    out.csv(
        "organisations.csv",
        &["orgID", "orgName", "countryCode"],
        OrgDirectory::from_participations(&t.participations).0.into_iter().map(|(id, info)| OrganisationRow {
            org_id: id,
            org_name: info.name,
            country_code: info.country,
        }),
    )?;
    out.csv(
        "rejects.csv",
        &["table", "programme", "line", "reason", "detail"],
        t.rejects.iter().map(RejectRow::from),
    )
}
