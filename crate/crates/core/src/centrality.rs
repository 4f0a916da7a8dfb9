//! Degree, strength and k-coreness of organisations.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::graph::{CentralitySlot, Graph, GraphError};
use crate::scalar::Weight;

/// Centrality values of one organisation in one year.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentralityRecord<W> {
    pub year: i32,
    pub org_id: String,
    pub degree: usize,
    pub strength: W,
    pub coreness: usize,
    /// Projects the organisation takes part in (not the same as degree).
    pub participations: usize,
}

/// Number of distinct neighbours of `id`.
pub fn degree<W: Weight>(g: &Graph<W>, id: &str) -> Result<usize, GraphError> {
    Ok(g.neighbors(g.require(id)?).len())
}

/// Sum of the weights of the edges incident to `id`.
pub fn strength<W: Weight>(g: &Graph<W>, id: &str) -> Result<W, GraphError> {
    Ok(g.weighted_degree(g.require(id)?))
}

/// Core number of every node, by storage index (Batagelj–Zaveršnik bucket peeling, O(m)).
pub fn core_numbers<W: Weight>(g: &Graph<W>) -> Vec<usize> {
    let n = g.node_count();
    let mut deg: Vec<usize> = (0..n).map(|v| g.neighbors(v).len()).collect();
    let max_deg = deg.iter().copied().max().unwrap_or(0);

    // bin[d] = start of the block of vertices with degree d in `vert`
    let mut bin = vec![0usize; max_deg + 1];
    for &d in &deg {
        bin[d] += 1;
    }
    let mut start = 0;
    for b in bin.iter_mut() {
        let count = *b;
        *b = start;
        start += count;
    }
    let mut pos = vec![0usize; n];
    let mut vert = vec![0usize; n];
    for v in 0..n {
        pos[v] = bin[deg[v]];
        vert[pos[v]] = v;
        bin[deg[v]] += 1;
    }
    for d in (1..=max_deg).rev() {
        bin[d] = bin[d - 1];
    }
    if max_deg > 0 || n > 0 {
        bin[0] = 0;
    }

    for i in 0..n {
        let v = vert[i];
        for &(u, _) in g.neighbors(v) {
            if deg[u] > deg[v] {
                let du = deg[u];
                let pu = pos[u];
                let pw = bin[du];
                let w = vert[pw];
                if u != w {
                    pos[u] = pw;
                    vert[pu] = w;
                    pos[w] = pu;
                    vert[pw] = u;
                }
                bin[du] += 1;
                deg[u] -= 1;
            }
        }
    }
    deg
}

/// Core number keyed by organisation id.
pub fn coreness<W: Weight>(g: &Graph<W>) -> BTreeMap<String, usize> {
    g.node_ids().map(String::from).zip(core_numbers(g)).collect()
}

/// Degree, strength and coreness of every node, by storage index.
pub fn centrality_slots<W: Weight>(g: &Graph<W>) -> Vec<CentralitySlot<W>> {
    core_numbers(g)
        .into_iter()
        .enumerate()
        .map(|(i, coreness)| CentralitySlot {
            degree: g.neighbors(i).len(),
            strength: g.weighted_degree(i),
            coreness,
        })
        .collect()
}

/// One row per (year, node), sorted by year then organisation id.
pub fn centrality_table<'a, W: Weight>(graphs: impl IntoIterator<Item = &'a Graph<W>>) -> Vec<CentralityRecord<W>> {
    let mut rows = Vec::new();
    for g in graphs {
        for (i, slot) in centrality_slots(g).into_iter().enumerate() {
            let node = g.node(i);
            rows.push(CentralityRecord {
                year: g.year(),
                org_id: node.id.clone(),
                degree: slot.degree,
                strength: slot.strength,
                coreness: slot.coreness,
                participations: node.participations,
            });
        }
    }
    rows.sort_by(|a, b| (a.year, &a.org_id).cmp(&(b.year, &b.org_id)));
    rows
}

/// Yearly minimum and maximum of each measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YearRange {
    pub year: i32,
    pub nodes: usize,
    pub degree_min: usize,
    pub degree_max: usize,
    pub strength_min: f64,
    pub strength_max: f64,
    pub coreness_min: usize,
    pub coreness_max: usize,
}

pub fn yearly_ranges<W: Weight>(rows: &[CentralityRecord<W>]) -> Vec<YearRange> {
    let mut out: Vec<YearRange> = Vec::new();
    for r in rows {
        let s = r.strength.as_f64();
        match out.last_mut() {
            Some(y) if y.year == r.year => {
                y.nodes += 1;
                y.degree_min = y.degree_min.min(r.degree);
                y.degree_max = y.degree_max.max(r.degree);
                y.strength_min = y.strength_min.min(s);
                y.strength_max = y.strength_max.max(s);
                y.coreness_min = y.coreness_min.min(r.coreness);
                y.coreness_max = y.coreness_max.max(r.coreness);
            }
            _ => out.push(YearRange {
                year: r.year,
                nodes: 1,
                degree_min: r.degree,
                degree_max: r.degree,
                strength_min: s,
                strength_max: s,
                coreness_min: r.coreness,
                coreness_max: r.coreness,
            }),
        }
    }
    out
}
