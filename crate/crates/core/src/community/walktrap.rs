//! Walktrap: agglomerative clustering on random-walk distances.
//!
//! Each node gets a self-loop carrying its mean incident weight. Communities
//! are described by the distribution of a `t`-step walk started uniformly
//! inside them; at every step the adjacent pair whose merge least increases
//! the within-community squared distance is merged. Near-equal candidates are
//! ordered by the smallest organisation ids they contain, so the result does
//! not depend on storage order. The dendrogram is cut at the first level of
//! maximal modularity.

use std::collections::BTreeMap;

use super::{Algorithm, CommunityDetector, CommunityError};
use crate::graph::Graph;
use crate::scalar::Weight;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Walktrap {
    pub walk_length: usize,
}

impl Default for Walktrap {
    fn default() -> Self {
        Walktrap { walk_length: 4 }
    }
}

struct Cluster<W> {
    size: usize,
    /// Rank (by organisation id) of the smallest member.
    min_rank: usize,
    walk: Vec<W>,
    /// Total incident weight of the members in the original graph.
    total: W,
    /// Adjacent cluster → (connecting weight, Δσ of merging).
    links: BTreeMap<usize, (W, W)>,
}

/// One merge of the dendrogram: `a` and `b` become cluster `into`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Merge {
    pub a: usize,
    pub b: usize,
    pub into: usize,
}

/// Full dendrogram with the modularity after each merge.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dendrogram {
    pub merges: Vec<Merge>,
    /// `modularity[i]` is the modularity after `i` merges.
    pub modularity: Vec<f64>,
    /// Number of merges at the cut.
    pub best_level: usize,
}

impl Dendrogram {
    /// Per-node labels after `level` merges, renumbered by first appearance.
    pub fn labels_at(&self, n: usize, level: usize) -> Vec<usize> {
        let mut cluster: Vec<usize> = (0..n).collect();
        let mut owner: Vec<usize> = (0..n).collect();
        let mut members: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
        for m in &self.merges[..level] {
            let mut joined = std::mem::take(&mut members[m.a]);
            joined.append(&mut members[m.b]);
            if members.len() <= m.into {
                members.resize(m.into + 1, Vec::new());
            }
            for &v in &joined {
                owner[v] = m.into;
            }
            members[m.into] = joined;
        }
        let mut map = BTreeMap::new();
        for v in 0..n {
            let next = map.len();
            cluster[v] = *map.entry(owner[v]).or_insert(next);
        }
        cluster
    }
}

fn walk_distribution<W: Weight>(g: &Graph<W>, loops: &[W], degree: &[W], start: usize, steps: usize) -> Vec<W> {
    let n = g.node_count();
    let mut v = vec![W::zero(); n];
    v[start] = W::one();
    let mut next = vec![W::zero(); n];
    for _ in 0..steps {
        next.iter_mut().for_each(|x| *x = W::zero());
        for k in 0..n {
            if v[k] == W::zero() {
                continue;
            }
            let share = v[k] / degree[k];
            next[k] = next[k] + share * loops[k];
            for &(j, w) in g.neighbors(k) {
                next[j] = next[j] + share * w;
            }
        }
        std::mem::swap(&mut v, &mut next);
    }
    v
}

fn delta_sigma<W: Weight>(a: &Cluster<W>, b: &Cluster<W>, degree: &[W], n: usize) -> W {
    let r2: W = a
        .walk
        .iter()
        .zip(&b.walk)
        .zip(degree)
        .map(|((&x, &y), &d)| (x - y) * (x - y) / d)
        .sum();
    let (sa, sb) = (W::of(a.size as f64), W::of(b.size as f64));
    sa * sb / (sa + sb) * r2 / W::of(n as f64)
}

impl Walktrap {
    /// Builds the complete dendrogram and locates the modularity-maximising cut.
    pub fn dendrogram<W: Weight>(&self, g: &Graph<W>) -> Dendrogram {
        let n = g.node_count();
        let strength: Vec<W> = (0..n).map(|i| g.weighted_degree(i)).collect();
        let loops: Vec<W> = (0..n)
            .map(|i| match g.neighbors(i).len() {
                0 => W::one(),
                k => strength[i] / W::of(k as f64),
            })
            .collect();
        let degree: Vec<W> = strength.iter().zip(&loops).map(|(&s, &l)| s + l).collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| g.node(a).id.cmp(&g.node(b).id));
        let mut rank = vec![0; n];
        for (r, &v) in order.iter().enumerate() {
            rank[v] = r;
        }

        let mut clusters: Vec<Option<Cluster<W>>> = (0..n)
            .map(|i| {
                Some(Cluster {
                    size: 1,
                    min_rank: rank[i],
                    walk: walk_distribution(g, &loops, &degree, i, self.walk_length),
                    total: strength[i],
                    links: g.neighbors(i).iter().map(|&(j, w)| (j, (w, W::zero()))).collect(),
                })
            })
            .collect();
        for i in 0..n {
            let ids: Vec<usize> = clusters[i].as_ref().unwrap().links.keys().copied().collect();
            for j in ids {
                let d = delta_sigma(clusters[i].as_ref().unwrap(), clusters[j].as_ref().unwrap(), &degree, n);
                clusters[i].as_mut().unwrap().links.get_mut(&j).unwrap().1 = d;
            }
        }

        let two_m: W = strength.iter().copied().sum();
        let mut q = if two_m > W::zero() {
            -strength.iter().map(|&s| (s / two_m) * (s / two_m)).sum::<W>()
        } else {
            W::zero()
        };
        let mut dendrogram = Dendrogram {
            merges: Vec::new(),
            modularity: vec![q.as_f64()],
            best_level: 0,
        };
        let mut best_q = q;

        loop {
            let mut least: Option<W> = None;
            for c in clusters.iter().flatten() {
                for &(_, d) in c.links.values() {
                    least = Some(least.map_or(d, |m| if d < m { d } else { m }));
                }
            }
            let Some(least) = least else { break };
            let mut pick: Option<((usize, usize), usize, usize)> = None;
            for (a, c) in clusters.iter().enumerate() {
                let Some(c) = c else { continue };
                for (&b, &(_, d)) in &c.links {
                    if b < a || d.definitely_gt(least) {
                        continue;
                    }
                    let other = clusters[b].as_ref().unwrap().min_rank;
                    let key = (c.min_rank.min(other), c.min_rank.max(other));
                    if pick.is_none_or(|(k, _, _)| key < k) {
                        pick = Some((key, a, b));
                    }
                }
            }
            let (_, a, b) = pick.expect("a minimal pair exists");
            let ca = clusters[a].take().unwrap();
            let cb = clusters[b].take().unwrap();
            let between = ca.links[&b].0;
            if two_m > W::zero() {
                q = q + W::of(2.0) * between / two_m - W::of(2.0) * (ca.total / two_m) * (cb.total / two_m);
            }
            let into = clusters.len();
            let (sa, sb) = (W::of(ca.size as f64), W::of(cb.size as f64));
            let walk = ca.walk.iter().zip(&cb.walk).map(|(&x, &y)| (sa * x + sb * y) / (sa + sb)).collect();
            let mut links: BTreeMap<usize, (W, W)> = BTreeMap::new();
            for (&d, &(w, _)) in ca.links.iter().chain(&cb.links) {
                if d != a && d != b {
                    let e = links.entry(d).or_insert((W::zero(), W::zero()));
                    e.0 = e.0 + w;
                }
            }
            let mut merged = Cluster {
                size: ca.size + cb.size,
                min_rank: ca.min_rank.min(cb.min_rank),
                walk,
                total: ca.total + cb.total,
                links,
            };
            let neighbours: Vec<usize> = merged.links.keys().copied().collect();
            for d in neighbours {
                let other = clusters[d].as_mut().unwrap();
                other.links.remove(&a);
                other.links.remove(&b);
                let ds = delta_sigma(&merged, other, &degree, n);
                let w = merged.links[&d].0;
                other.links.insert(into, (w, ds));
                merged.links.get_mut(&d).unwrap().1 = ds;
            }
            clusters.push(Some(merged));
            dendrogram.merges.push(Merge { a, b, into });
            dendrogram.modularity.push(q.as_f64());
            if q.definitely_gt(best_q) {
                best_q = q;
                dendrogram.best_level = dendrogram.merges.len();
            }
        }
        dendrogram
    }
}

impl<W: Weight> CommunityDetector<W> for Walktrap {
    fn algorithm(&self) -> Algorithm {
        Algorithm::Walktrap
    }

    fn detect_labels(&self, g: &Graph<W>, _seed: u64) -> Result<Vec<usize>, CommunityError> {
        let d = self.dendrogram(g);
        Ok(d.labels_at(g.node_count(), d.best_level))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::community::modularity_of_labels;
    use crate::graph::shuffle;

    fn two_triangles() -> Graph<f64> {
        Graph::from_weighted_edges(
            2020,
            &[("a", "b", 1.0), ("b", "c", 1.0), ("a", "c", 1.0), ("c", "d", 0.2), ("d", "e", 1.0), ("e", "f", 1.0), ("d", "f", 1.0)],
        )
        .unwrap()
    }

    #[test]
    fn splits_two_triangles() {
        let g = two_triangles();
        let labels = Walktrap::default().detect_labels(&g, 0).unwrap();
        assert_eq!(labels, vec![0, 0, 0, 1, 1, 1]);
    }

    #[test]
    fn dendrogram_modularity_matches_direct_evaluation() {
        let g = two_triangles();
        let d = Walktrap::default().dendrogram(&g);
        assert_eq!(d.merges.len(), 5);
        for level in 0..=d.merges.len() {
            let q = modularity_of_labels(&g, &d.labels_at(6, level), 1.0);
            assert!((q - d.modularity[level]).abs() < 1e-12);
        }
    }

    #[test]
    fn never_merges_across_components() {
        let g = Graph::from_weighted_edges(2020, &[("a", "b", 1.0), ("c", "d", 1.0)]).unwrap();
        let d = Walktrap::default().dendrogram(&g);
        assert_eq!(d.merges.len(), 2);
    }

    #[test]
    fn invariant_under_shuffling() {
        // A ring of equal triangles: every candidate merge ties.
        let mut edges = Vec::new();
        for t in 0..6 {
            let v = |i: usize| format!("t{t}v{i}");
            edges.push((v(0), v(1), 1.0));
            edges.push((v(1), v(2), 1.0));
            edges.push((v(0), v(2), 1.0));
            edges.push((v(2), format!("t{}v0", (t + 1) % 6), 1.0));
        }
        let g = Graph::from_weighted_edges(2020, &edges).unwrap();
        let reference = crate::community::detect(&g, Algorithm::Walktrap, &Default::default(), 0).unwrap();
        for seed in 1..20 {
            let p = crate::community::detect(&shuffle(&g, seed), Algorithm::Walktrap, &Default::default(), seed).unwrap();
            assert_eq!(p.canonical_key, reference.canonical_key);
        }
    }
}
