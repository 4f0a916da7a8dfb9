//! Linking communities across consecutive years.
//!
//! For communities `C_i` (year y) and `C_j` (year y+1) with overlap `o`, let
//! `f_src = o / |C_i|` and `f_dst = o / |C_j|`. A pair is a split branch when
//! `f_dst > θ` and `C_i` has at least two such targets, and a merge branch when
//! `f_src > θ` and `C_j` has at least two such sources. A pair that is both is
//! a mix; otherwise `f_src > θ ∧ f_dst > θ` is a continuation and any other
//! overlap is a mix.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::centrality::CentralityRecord;
use crate::community::Partition;
use crate::scalar::Weight;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TemporalError {
    #[error("no partition for year {0}; temporal analysis needs consecutive years")]
    MissingYear(i32),
    #[error("more than one partition for year {0}")]
    DuplicateYear(i32),
    #[error("need partitions for at least two consecutive years")]
    TooFewYears,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Continue,
    Split,
    Merge,
    Mix,
    Disjoint,
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EventKind::Continue => "continue",
            EventKind::Split => "split",
            EventKind::Merge => "merge",
            EventKind::Mix => "mix",
            EventKind::Disjoint => "disjoint",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LineageEvent {
    pub from_year: i32,
    pub from_community: usize,
    pub to_community: usize,
    pub kind: EventKind,
    pub overlap: usize,
    pub jaccard: f64,
}

struct Side<'a> {
    members: Vec<Vec<&'a str>>,
}

impl<'a> Side<'a> {
    fn of(p: &'a Partition) -> Self {
        Side { members: p.communities() }
    }

    fn size(&self, c: usize) -> usize {
        self.members[c].len()
    }

    /// Smallest member id, used to order communities deterministically.
    fn key(&self, c: usize) -> &'a str {
        self.members[c].first().copied().unwrap_or("")
    }
}

fn overlaps(from: &Partition, to: &Partition) -> BTreeMap<(usize, usize), usize> {
    let mut out = BTreeMap::new();
    for (id, &ci) in &from.assignment {
        if let Some(cj) = to.community_of(id) {
            *out.entry((ci, cj)).or_insert(0) += 1;
        }
    }
    out
}

fn classify(from: &Partition, to: &Partition, theta: f64, include_disjoint: bool) -> Vec<LineageEvent> {
    let src = Side::of(from);
    let dst = Side::of(to);
    let shared = overlaps(from, to);
    let frac = |o: usize, size: usize| o as f64 / size as f64;
    let mut split_targets = vec![0usize; from.k];
    let mut merge_sources = vec![0usize; to.k];
    for (&(i, j), &o) in &shared {
        if frac(o, dst.size(j)) > theta {
            split_targets[i] += 1;
        }
        if frac(o, src.size(i)) > theta {
            merge_sources[j] += 1;
        }
    }
    let mut events = Vec::new();
    for i in 0..from.k {
        for j in 0..to.k {
            let o = shared.get(&(i, j)).copied().unwrap_or(0);
            if o == 0 && !include_disjoint {
                continue;
            }
            let (fs, fd) = (frac(o, src.size(i)), frac(o, dst.size(j)));
            let split = fd > theta && split_targets[i] >= 2;
            let merge = fs > theta && merge_sources[j] >= 2;
            let kind = match (o, split, merge) {
                (0, _, _) => EventKind::Disjoint,
                (_, true, true) => EventKind::Mix,
                (_, true, false) => EventKind::Split,
                (_, false, true) => EventKind::Merge,
                _ if fs > theta && fd > theta => EventKind::Continue,
                _ => EventKind::Mix,
            };
            events.push(LineageEvent {
                from_year: from.year,
                from_community: i,
                to_community: j,
                kind,
                overlap: o,
                jaccard: o as f64 / (src.size(i) + dst.size(j) - o) as f64,
            });
        }
    }
    events
}

/// Events for every pair of communities that share at least one organisation.
pub fn match_communities(from: &Partition, to: &Partition, theta: f64) -> Vec<LineageEvent> {
    classify(from, to, theta, false)
}

/// Full `k_y × k_{y+1}` matrix of events, disjoint pairs included.
pub fn event_matrix(from: &Partition, to: &Partition, theta: f64) -> Vec<LineageEvent> {
    classify(from, to, theta, true)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", tag = "reason")]
pub enum LabelOrigin {
    /// No inheriting event reached this community.
    Created,
    Inherited { from_year: i32, from_community: usize, kind: EventKind },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LabelLogEntry {
    pub year: i32,
    pub community: usize,
    pub label: String,
    pub origin: LabelOrigin,
}

/// Global labels of every (year, local community) plus how each was obtained.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GlobalLabelMap {
    pub labels: BTreeMap<(i32, usize), String>,
    pub log: Vec<LabelLogEntry>,
}

impl GlobalLabelMap {
    pub fn get(&self, year: i32, community: usize) -> Option<&str> {
        self.labels.get(&(year, community)).map(String::as_str)
    }

    /// Years in which `label` appears, ascending.
    pub fn years_of(&self, label: &str) -> Vec<i32> {
        let mut years: Vec<i32> = self.labels.iter().filter(|(_, l)| *l == label).map(|(&(y, _), _)| y).collect();
        years.dedup();
        years
    }

    /// Distinct labels in creation order.
    pub fn label_names(&self) -> Vec<&str> {
        self.log
            .iter()
            .filter(|e| e.origin == LabelOrigin::Created)
            .map(|e| e.label.as_str())
            .collect()
    }

    /// True when no label skips a year.
    pub fn timelines_connected(&self) -> bool {
        self.label_names().iter().all(|l| self.years_of(l).windows(2).all(|w| w[1] == w[0] + 1))
    }
}

/// Orders partitions by year and checks that the years are consecutive.
pub fn consecutive(partitions: &[Partition]) -> Result<Vec<&Partition>, TemporalError> {
    let mut sorted: Vec<&Partition> = partitions.iter().collect();
    sorted.sort_by_key(|p| p.year);
    for w in sorted.windows(2) {
        if w[0].year == w[1].year {
            return Err(TemporalError::DuplicateYear(w[0].year));
        }
        if w[1].year != w[0].year + 1 {
            return Err(TemporalError::MissingYear(w[0].year + 1));
        }
    }
    Ok(sorted)
}

/// Assigns global labels by a left-to-right fold over years.
///
/// Continue, split and merge events are claims to carry a label forward.
/// Claims are granted greedily by overlap, then Jaccard, then smaller source
/// and target key, so each source label goes to at most one target and each
/// target inherits from at most one source. Everything else gets a new label.
pub fn assign_global_labels(partitions: &[Partition], events: &[LineageEvent]) -> Result<GlobalLabelMap, TemporalError> {
    let sorted = consecutive(partitions)?;
    let mut map = GlobalLabelMap::default();
    let mut next = 1;
    let mut fresh = |map: &mut GlobalLabelMap, year: i32, community: usize| {
        let label = format!("C{next}");
        next += 1;
        map.labels.insert((year, community), label.clone());
        map.log.push(LabelLogEntry {
            year,
            community,
            label,
            origin: LabelOrigin::Created,
        });
    };
    let Some(first) = sorted.first() else {
        return Ok(map);
    };
    for c in 0..first.k {
        fresh(&mut map, first.year, c);
    }
    let mut by_year: HashMap<i32, Vec<&LineageEvent>> = HashMap::new();
    for e in events {
        by_year.entry(e.from_year).or_default().push(e);
    }
    for w in sorted.windows(2) {
        let (from, to) = (w[0], w[1]);
        let (src, dst) = (Side::of(from), Side::of(to));
        let mut claims: Vec<&LineageEvent> = by_year
            .get(&from.year)
            .map(|v| v.iter().copied().filter(|e| matches!(e.kind, EventKind::Continue | EventKind::Split | EventKind::Merge)).collect())
            .unwrap_or_default();
        claims.sort_by(|a, b| {
            b.overlap
                .cmp(&a.overlap)
                .then(b.jaccard.total_cmp(&a.jaccard))
                .then_with(|| src.key(a.from_community).cmp(src.key(b.from_community)))
                .then_with(|| dst.key(a.to_community).cmp(dst.key(b.to_community)))
        });
        let mut donated = vec![false; from.k];
        let mut received = vec![false; to.k];
        for e in claims {
            let (i, j) = (e.from_community, e.to_community);
            if donated[i] || received[j] {
                continue;
            }
            let Some(label) = map.get(from.year, i).map(str::to_string) else {
                continue;
            };
            donated[i] = true;
            received[j] = true;
            map.labels.insert((to.year, j), label.clone());
            map.log.push(LabelLogEntry {
                year: to.year,
                community: j,
                label,
                origin: LabelOrigin::Inherited {
                    from_year: from.year,
                    from_community: i,
                    kind: e.kind,
                },
            });
        }
        for j in 0..to.k {
            if !received[j] {
                fresh(&mut map, to.year, j);
            }
        }
    }
    Ok(map)
}

/// Events for all consecutive pairs and the resulting global labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lineage {
    pub events: Vec<LineageEvent>,
    pub labels: GlobalLabelMap,
}

pub fn track(partitions: &[Partition], theta: f64) -> Result<Lineage, TemporalError> {
    let sorted = consecutive(partitions)?;
    if sorted.len() < 2 {
        return Err(TemporalError::TooFewYears);
    }
    let events: Vec<LineageEvent> = sorted.windows(2).flat_map(|w| match_communities(w[0], w[1], theta)).collect();
    let labels = assign_global_labels(partitions, &events)?;
    Ok(Lineage { events, labels })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SeriesRow<W> {
    pub global_label: String,
    pub year: i32,
    pub total_strength: W,
    pub member_count: usize,
}

/// Summed strength and member count of each global label per year.
///
/// Rows are ordered by label rank (total strength over all years, largest
/// first, then label creation order) and year. With `top_n`, only the highest
/// ranked labels are kept.
pub fn community_series<W: Weight>(
    labels: &GlobalLabelMap,
    partitions: &[Partition],
    centrality: &[CentralityRecord<W>],
    top_n: Option<usize>,
) -> Vec<SeriesRow<W>> {
    let strength: HashMap<(i32, &str), W> = centrality.iter().map(|r| ((r.year, r.org_id.as_str()), r.strength)).collect();
    let mut cells: BTreeMap<(String, i32), (W, usize)> = BTreeMap::new();
    for p in partitions {
        for (id, &c) in &p.assignment {
            let Some(label) = labels.get(p.year, c) else { continue };
            let cell = cells.entry((label.to_string(), p.year)).or_insert((W::zero(), 0));
            cell.0 = cell.0 + strength.get(&(p.year, id.as_str())).copied().unwrap_or_else(W::zero);
            cell.1 += 1;
        }
    }
    let creation: HashMap<&str, usize> = labels.label_names().into_iter().enumerate().map(|(i, l)| (l, i)).collect();
    let mut totals: HashMap<&str, W> = HashMap::new();
    for ((label, _), (s, _)) in &cells {
        let t = totals.entry(label.as_str()).or_insert(W::zero());
        *t = *t + *s;
    }
    let mut ranked: Vec<&str> = totals.keys().copied().collect();
    ranked.sort_by(|a, b| {
        totals[b]
            .partial_cmp(&totals[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(creation.get(a).cmp(&creation.get(b)))
    });
    ranked.truncate(top_n.unwrap_or(usize::MAX));
    ranked
        .iter()
        .flat_map(|label| {
            cells
                .range((label.to_string(), i32::MIN)..=(label.to_string(), i32::MAX))
                .map(|((l, y), &(s, m))| SeriesRow {
                    global_label: l.clone(),
                    year: *y,
                    total_strength: s,
                    member_count: m,
                })
                .collect::<Vec<_>>()
        })
        .collect()
}
