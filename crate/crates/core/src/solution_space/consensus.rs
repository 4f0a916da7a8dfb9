use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::{trial_seed, Result, SolutionSpace, SolutionSpaceError};
use crate::community::{validate_labels, DetectParams, Partition};
use crate::graph::Graph;
use crate::scalar::Weight;

/// How solutions are weighted in the co-assignment matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConsensusWeighting {
    /// Proportional to each solution's posterior mean probability.
    #[default]
    Frequency,
    Uniform,
}

/// Tolerance for deciding that a co-assignment value equals the threshold.
const TIE: f64 = 1e-9;

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }

    fn groups(&mut self) -> Vec<Vec<usize>> {
        let n = self.0.len();
        let mut out: Vec<Vec<usize>> = Vec::new();
        let mut slot = vec![usize::MAX; n];
        for v in 0..n {
            let r = self.find(v);
            if slot[r] == usize::MAX {
                slot[r] = out.len();
                out.push(Vec::new());
            }
            out[slot[r]].push(v);
        }
        out
    }
}

/// Upper-triangular co-assignment matrix.
struct CoAssignment {
    n: usize,
    values: Vec<f64>,
}

impl CoAssignment {
    fn at(&self, u: usize, v: usize) -> f64 {
        let (a, b) = if u < v { (u, v) } else { (v, u) };
        self.values[a * self.n - a * (a + 1) / 2 + (b - a - 1)]
    }
}

fn co_assignment<W: Weight>(space: &SolutionSpace, g: &Graph<W>, weighting: ConsensusWeighting) -> Result<CoAssignment> {
    let n = g.node_count();
    let raw: Vec<f64> = space
        .entries
        .iter()
        .map(|e| match weighting {
            ConsensusWeighting::Frequency => e.estimate.p_mean,
            ConsensusWeighting::Uniform => 1.0,
        })
        .collect();
    let total: f64 = raw.iter().sum();
    let mut values = vec![0.0; n * n.saturating_sub(1) / 2];
    for (entry, w) in space.entries.iter().zip(raw) {
        let labels = entry.partition.labels_for(g)?;
        let w = w / total;
        let mut pos = 0;
        for u in 0..n {
            for v in u + 1..n {
                if labels[u] == labels[v] {
                    values[pos] += w;
                }
                pos += 1;
            }
        }
    }
    Ok(CoAssignment { n, values })
}

fn min_id<'a, W: Weight>(g: &'a Graph<W>, members: &[usize]) -> &'a str {
    members.iter().map(|&v| g.node(v).id.as_str()).min().unwrap_or("")
}

/// Splits `members` into the connected pieces of their induced subgraph.
fn connected_pieces<W: Weight>(g: &Graph<W>, members: &[usize], inside: &mut [bool]) -> Vec<Vec<usize>> {
    for &v in members {
        inside[v] = true;
    }
    let mut pieces = Vec::new();
    for &start in members {
        if !inside[start] {
            continue;
        }
        inside[start] = false;
        let mut piece = vec![start];
        let mut i = 0;
        while i < piece.len() {
            for &(w, _) in g.neighbors(piece[i]) {
                if inside[w] {
                    inside[w] = false;
                    piece.push(w);
                }
            }
            i += 1;
        }
        piece.sort_unstable();
        pieces.push(piece);
    }
    pieces
}

fn labels_of(groups: &[Vec<usize>], n: usize) -> Vec<usize> {
    let mut labels = vec![0; n];
    for (c, members) in groups.iter().enumerate() {
        for &v in members {
            labels[v] = c;
        }
    }
    labels
}

/// Consensus community detection over a solution space.
///
/// Pairs co-assigned with weight strictly above the threshold are joined; a
/// group whose only links sit exactly at the threshold attaches to the larger
/// group it is most strongly tied to (smaller member id on ties). Groups are
/// split into connected pieces, groups with mixing above 0.5 are re-detected
/// on their induced subgraph, and any community still invalid is merged into
/// its most strongly connected neighbour until all are valid.
pub fn consensus<W: Weight>(
    space: &SolutionSpace,
    g: &Graph<W>,
    params: &DetectParams,
    config: &super::ExplorationConfig,
) -> Result<Partition> {
    if space.is_empty() {
        return Err(SolutionSpaceError::EmptySpace);
    }
    let n = g.node_count();
    let theta = config.consensus_threshold;
    let d = co_assignment(space, g, config.consensus_weighting)?;
    if n > 1 && d.values.iter().all(|&x| x < theta - TIE) {
        return Err(SolutionSpaceError::EmptyConsensus { threshold: theta });
    }

    let mut strong = UnionFind::new(n);
    for u in 0..n {
        for v in u + 1..n {
            if d.at(u, v) > theta + TIE {
                strong.union(u, v);
            }
        }
    }
    let groups = strong.groups();
    let mut group_of = vec![0; n];
    for (c, members) in groups.iter().enumerate() {
        for &v in members {
            group_of[v] = c;
        }
    }
    // Rank 0 is the largest group; equal sizes are ordered by smallest id.
    let mut order: Vec<usize> = (0..groups.len()).collect();
    order.sort_by(|&a, &b| groups[b].len().cmp(&groups[a].len()).then_with(|| min_id(g, &groups[a]).cmp(min_id(g, &groups[b]))));
    let mut rank = vec![0; groups.len()];
    for (r, &c) in order.iter().enumerate() {
        rank[c] = r;
    }
    let mut attach = UnionFind::new(groups.len());
    for (c, members) in groups.iter().enumerate() {
        let mut best: Option<(f64, usize)> = None;
        for &u in members {
            for v in 0..n {
                let t = group_of[v];
                if rank[t] >= rank[c] {
                    continue;
                }
                let x = d.at(u, v);
                if (x - theta).abs() > TIE {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some((bx, bt)) => match x.partial_cmp(&bx).unwrap_or(Ordering::Equal) {
                        Ordering::Greater => x - bx > TIE,
                        _ if (x - bx).abs() <= TIE => min_id(g, &groups[t]) < min_id(g, &groups[bt]),
                        _ => false,
                    },
                };
                if better {
                    best = Some((x, t));
                }
            }
        }
        if let Some((_, t)) = best {
            attach.union(c, t);
        }
    }
    let mut candidates: Vec<Vec<usize>> = vec![Vec::new(); groups.len()];
    for (c, members) in groups.iter().enumerate() {
        let root = attach.find(c);
        candidates[root].extend(members.iter().copied());
    }

    let mut inside = vec![false; n];
    let mut pieces: Vec<Vec<usize>> = candidates
        .iter()
        .filter(|c| !c.is_empty())
        .flat_map(|c| connected_pieces(g, c, &mut inside))
        .collect();

    // Re-detect inside candidates whose mixing is too high.
    let validity = validate_labels(g, &labels_of(&pieces, n));
    let detector = space.algorithm.detector::<W>(params);
    let mut refined = Vec::new();
    for (i, piece) in pieces.iter().enumerate() {
        if validity[i].is_valid() || piece.len() < 2 {
            refined.push(piece.clone());
            continue;
        }
        let sub = g.induced_subgraph(piece);
        let seed = trial_seed(space.base_seed, usize::MAX - i);
        let labels = detector.detect_labels(&sub, seed)?;
        let k = labels.iter().copied().max().map_or(0, |m| m + 1);
        let mut parts = vec![Vec::new(); k];
        for (local, &l) in labels.iter().enumerate() {
            parts[l].push(piece[local]);
        }
        for part in parts.into_iter().filter(|p| !p.is_empty()) {
            refined.extend(connected_pieces(g, &part, &mut inside));
        }
    }
    pieces = refined;
    repair(g, &mut pieces);
    Ok(Partition::from_graph_labels(g, &labels_of(&pieces, n), space.algorithm, space.base_seed))
}

/// Makes `p` valid with as little change as possible: disconnected
/// communities are split into their pieces, then invalid communities are
/// merged into neighbours as in [`consensus`]. A valid partition comes back
/// unchanged.
pub fn repair_partition<W: Weight>(g: &Graph<W>, p: &Partition) -> Result<Partition> {
    let labels = p.labels_for(g)?;
    let mut groups = vec![Vec::new(); p.k];
    for (v, &c) in labels.iter().enumerate() {
        groups[c].push(v);
    }
    let mut inside = vec![false; g.node_count()];
    let mut pieces: Vec<Vec<usize>> = groups.iter().flat_map(|c| connected_pieces(g, c, &mut inside)).collect();
    repair(g, &mut pieces);
    Ok(Partition::from_graph_labels(g, &labels_of(&pieces, g.node_count()), p.algorithm, p.seed))
}

/// Merges the worst invalid community into its most strongly connected
/// neighbour until every community is valid.
fn repair<W: Weight>(g: &Graph<W>, pieces: &mut Vec<Vec<usize>>) {
    loop {
        let n = g.node_count();
        let labels = labels_of(pieces, n);
        let validity = validate_labels(g, &labels);
        let worst = validity
            .iter()
            .filter(|c| !c.is_valid())
            .max_by(|a, b| {
                a.mixing_parameter
                    .partial_cmp(&b.mixing_parameter)
                    .unwrap_or(Ordering::Equal)
                    .then_with(|| min_id(g, &pieces[b.community]).cmp(min_id(g, &pieces[a.community])))
            })
            .map(|c| c.community);
        let Some(c) = worst else { return };
        let mut link = vec![W::zero(); pieces.len()];
        for &u in &pieces[c] {
            for &(v, w) in g.neighbors(u) {
                if labels[v] != c {
                    link[labels[v]] = link[labels[v]] + w;
                }
            }
        }
        let mut target: Option<usize> = None;
        for t in 0..pieces.len() {
            if link[t] <= W::zero() {
                continue;
            }
            target = match target {
                None => Some(t),
                Some(b) if link[t].definitely_gt(link[b]) => Some(t),
                Some(b) if !link[b].definitely_gt(link[t]) && min_id(g, &pieces[t]) < min_id(g, &pieces[b]) => Some(t),
                keep => keep,
            };
        }
        let Some(t) = target else { return };
        let moved = std::mem::take(&mut pieces[c]);
        pieces[t].extend(moved);
        pieces[t].sort_unstable();
        pieces.remove(c);
    }
}
