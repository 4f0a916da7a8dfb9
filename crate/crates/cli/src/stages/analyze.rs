use std::collections::BTreeMap;

use collabnet::centrality::{centrality_slots, centrality_table, yearly_ranges, CentralityRecord};
use collabnet::community::modularity;
use collabnet::graph::{project_one_mode, split_by_label, write_edge_list, write_graphml, Graph, OrgDirectory, OrgInfo};
use collabnet::ingest::{ProjectLabels, YearlyWeights};
use collabnet::solution_space::{
    confidence_bands, similarity_matrix, size_distribution, solve, Resolved, SolutionSpace,
};
use rayon::prelude::*;
use serde_json::json;

use super::rows::{
    CentralityRow, LabelRow, NetworkRow, OrganisationRow, PartitionRow, SelectionRow, WeightRow, YearRow,
};
use super::{year_seed, Upstream};
use crate::artifacts::{Artifacts, YearFailure};
use crate::config::RunConfig;
use crate::{Outcome, PipelineError, Stage};

pub(super) fn run(config: &RunConfig) -> Result<Outcome, PipelineError> {
    let up = Upstream::open(config, Stage::Ingest)?;
    let split = config.graph.split_label.as_deref();
    let mut needed = vec!["years.csv", "weights.csv", "organisations.csv"];
    if split.is_some() {
        if config.input.labels.is_none() {
            return Err(PipelineError::Config("graph.split_label needs input.labels".into()));
        }
        needed.push("labels.csv");
    }
    up.require(&needed)?;

    let mut inputs = Vec::new();
    let years: Vec<YearRow> = up.csv("years.csv", &mut inputs)?;
    let weights: Vec<WeightRow> = up.csv("weights.csv", &mut inputs)?;
    let orgs: Vec<OrganisationRow> = up.csv("organisations.csv", &mut inputs)?;
    let labels = match split {
        Some(_) => {
            let rows: Vec<LabelRow> = up.csv("labels.csv", &mut inputs)?;
            let mut l = ProjectLabels::default();
            for r in rows {
                l.set(&r.proj_id, &r.label, r.value);
            }
            Some(l)
        }
        None => None,
    };

    let directory = OrgDirectory(
        orgs.into_iter()
            .map(|o| {
                let info = OrgInfo {
                    name: o.org_name,
                    country: o.country_code,
                };
                (o.org_id, info)
            })
            .collect(),
    );
    let mut matrices: BTreeMap<i32, YearlyWeights<f64>> = years
        .iter()
        .map(|y| y.year)
        .filter(|y| config.graph.first_year.is_none_or(|f| *y >= f) && config.graph.last_year.is_none_or(|l| *y <= l))
        .map(|y| (y, YearlyWeights::new(y, config.ingest.basis)))
        .collect();
    for w in weights {
        if let Some(m) = matrices.get_mut(&w.year) {
            m.entries.insert((w.org_id, w.proj_id), w.weight);
        }
    }
    if let (Some(label), Some(l)) = (split, &labels) {
        for m in matrices.values_mut() {
            *m = split_by_label(m, l, label).when_true;
        }
    }

    let results: Vec<YearResult> = matrices
        .values()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|m| analyze_year(config, m, &directory))
        .collect();

    let mut out = Artifacts::new();
    let mut failures = Vec::new();
    let mut centrality: Vec<CentralityRecord<f64>> = Vec::new();
    let mut network = Vec::new();
    let mut selections = Vec::new();
    let mut partitions = Vec::new();
    for r in results {
        if let Some(e) = r.error {
            log::warn!("{}: {e}", r.year);
            failures.push(YearFailure { year: r.year, error: e });
        }
        let Some(g) = r.graph else { continue };
        let y = g.year();
        let mut buf = Vec::new();
        write_graphml(&g, &mut buf).map_err(|e| PipelineError::Stage(e.to_string()))?;
        out.raw(format!("graphs/{y}.graphml"), buf);
        let mut buf = Vec::new();
        write_edge_list(&g, &mut buf).map_err(|e| PipelineError::Stage(e.to_string()))?;
        out.raw(format!("graphs/{y}.edges.csv"), buf);
        centrality.extend(centrality_table([&g]));
        network.push(r.network);
        if let (Some(space), Some(resolved)) = (r.space, r.resolved) {
            write_solution_space(&mut out, config, &space, &resolved)?;
            let q = modularity(&g, &resolved.partition).map_err(|e| PipelineError::Stage(e.to_string()))?;
            selections.push(SelectionRow {
                year: y,
                algorithm: space.algorithm,
                base_seed: space.base_seed,
                selection: resolved.selection,
                k: resolved.partition.k,
                solutions: space.len(),
                trials: space.trials,
                failed: space.failed,
                valid: resolved.validity.valid,
                modularity: q,
                partition_key: resolved.partition.canonical_key.clone(),
            });
            partitions.extend(resolved.partition.assignment.iter().map(|(id, &c)| PartitionRow {
                year: y,
                org_id: id.clone(),
                community: c,
            }));
        }
    }

    out.csv(
        "centrality.csv",
        &["year", "orgID", "degree", "strength", "coreness", "participations"],
        centrality.iter().map(|r| CentralityRow {
            year: r.year,
            org_id: r.org_id.clone(),
            degree: r.degree,
            strength: r.strength,
            coreness: r.coreness,
            participations: r.participations,
        }),
    )?;
    out.json("coreness_ranges.json", &yearly_ranges(&centrality))?;
    out.csv(
        "network_summary.csv",
        &["year", "organisations", "collaborations", "totalWeight", "edgeWeight", "soloWeight", "projects"],
        &network,
    )?;
    out.csv(
        "selection.csv",
        &[
            "year", "algorithm", "baseSeed", "selection", "k", "solutions", "trials", "failed", "valid", "modularity", "partitionKey",
        ],
        &selections,
    )?;
    out.csv("partitions.csv", &["year", "orgID", "community"], &partitions)?;

    let summary = json!({
        "algorithm": config.community.algorithm,
        "years": matrices.keys().collect::<Vec<_>>(),
        "resolved": selections.iter().map(|s| s.year).collect::<Vec<_>>(),
        "failed": failures.iter().map(|f| f.year).collect::<Vec<_>>(),
    });
    out.commit(&config.out_dir(), Stage::Analyze, config, inputs, summary, failures.clone())?;
    log::info!("analyze: {} years, {} resolved, {} failed", matrices.len(), selections.len(), failures.len());
    Ok(Outcome { failures })
}

struct YearResult {
    year: i32,
    graph: Option<Graph<f64>>,
    network: NetworkRow,
    space: Option<SolutionSpace>,
    resolved: Option<Resolved>,
    error: Option<String>,
}

fn analyze_year(config: &RunConfig, matrix: &YearlyWeights<f64>, directory: &OrgDirectory) -> YearResult {
    let year = matrix.year;
    let network = NetworkRow {
        year,
        organisations: 0,
        collaborations: 0,
        total_weight: matrix.total(),
        edge_weight: 0.0,
        solo_weight: 0.0,
        projects: matrix.by_project().len(),
    };
    let mut result = YearResult {
        year,
        graph: None,
        network,
        space: None,
        resolved: None,
        error: None,
    };
    let mut g = match project_one_mode(matrix, directory, config.graph.projection) {
        Ok(p) => p.graph,
        Err(e) => {
            result.error = Some(e.to_string());
            return result;
        }
    };
    g.set_centrality(&centrality_slots(&g));
    result.network.organisations = g.node_count();
    result.network.collaborations = g.edge_count();
    result.network.edge_weight = g.total_edge_weight();
    result.network.solo_weight = g.total_solo_weight();

    let seed = year_seed(config.seed, year);
    match solve(&g, config.community.algorithm, &config.community.params(), &config.exploration, seed) {
        Ok((space, resolved)) => {
            match resolved.partition.labels_for(&g) {
                Ok(labels) => g.set_communities(&labels),
                Err(e) => result.error = Some(e.to_string()),
            }
            result.space = Some(space);
            result.resolved = Some(resolved);
        }
        Err(e) => result.error = Some(e.to_string()),
    }
    result.graph = Some(g);
    result
}

fn write_solution_space(out: &mut Artifacts, config: &RunConfig, space: &SolutionSpace, resolved: &Resolved) -> Result<(), PipelineError> {
    let y = space.year;
    out.json(&format!("solution_space/{y}.json"), space)?;
    out.json(&format!("validity/{y}.json"), &resolved.validity)?;
    let dir = format!("panels/{y}");
    out.csv(
        &format!("{dir}/bands.csv"),
        &["trial", "entryKey", "pMean", "pLower", "pUpper"],
        confidence_bands(space, &config.exploration),
    )?;
    out.csv(
        &format!("{dir}/frequency.csv"),
        &["entryKey", "count", "firstSeenTrial", "k", "valid", "modularity", "pMean", "pLower", "pUpper"],
        space.frequency_table(),
    )?;
    out.csv(&format!("{dir}/sizes.csv"), &["entryKey", "community", "size"], size_distribution(space))?;
    let similarity = similarity_matrix(space).map_err(|e| PipelineError::Stage(format!("{y}: {e}")))?;
    out.csv(&format!("{dir}/similarity.csv"), &["keyA", "keyB", "ari", "nmi"], similarity)
}
