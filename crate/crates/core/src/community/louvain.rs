//! Louvain modularity optimisation (local moving + aggregation).
//!
//! Nodes are visited in storage order and candidate communities in order of
//! first appearance in the adjacency list; a move is taken only when its gain
//! beats the incumbent by more than rounding noise. The outcome therefore
//! depends on storage order, which is exactly what shuffled trials probe.

use super::{Algorithm, CommunityDetector, CommunityError};
use crate::graph::Graph;
use crate::scalar::Weight;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Louvain {
    pub resolution: f64,
    /// Cap on local-moving sweeps per level.
    pub max_passes: usize,
}

impl Default for Louvain {
    fn default() -> Self {
        Louvain {
            resolution: 1.0,
            max_passes: 1000,
        }
    }
}

/// Modularity before and after each aggregation level.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LouvainTrace {
    pub levels: Vec<(f64, f64)>,
}

/// Aggregated working graph: adjacency without loops plus per-node loop weight.
struct Level<W> {
    adjacency: Vec<Vec<(usize, W)>>,
    /// Twice the internal edge weight folded into each node.
    loops: Vec<W>,
}

impl<W: Weight> Level<W> {
    fn from_graph(g: &Graph<W>) -> Self {
        Level {
            adjacency: (0..g.node_count()).map(|i| g.neighbors(i).to_vec()).collect(),
            loops: vec![W::zero(); g.node_count()],
        }
    }

    fn len(&self) -> usize {
        self.loops.len()
    }

    fn strength(&self, i: usize) -> W {
        self.loops[i] + self.adjacency[i].iter().map(|&(_, w)| w).sum::<W>()
    }

    fn modularity(&self, com: &[usize], resolution: W) -> W {
        let n = self.len();
        let mut inside = vec![W::zero(); n];
        let mut total = vec![W::zero(); n];
        for i in 0..n {
            let c = com[i];
            inside[c] = inside[c] + self.loops[i];
            total[c] = total[c] + self.loops[i];
            for &(j, w) in &self.adjacency[i] {
                total[c] = total[c] + w;
                if com[j] == c {
                    inside[c] = inside[c] + w;
                }
            }
        }
        let two_m: W = total.iter().copied().sum();
        if two_m <= W::zero() {
            return W::zero();
        }
        inside
            .iter()
            .zip(&total)
            .map(|(&i, &t)| i / two_m - resolution * (t / two_m) * (t / two_m))
            .sum()
    }

    /// Local moving phase. Returns community per node (renumbered 0..k in
    /// order of first appearance) and whether anything moved.
    fn local_moving(&self, resolution: W, max_passes: usize) -> Result<(Vec<usize>, bool), usize> {
        let n = self.len();
        let strength: Vec<W> = (0..n).map(|i| self.strength(i)).collect();
        let two_m: W = strength.iter().copied().sum();
        let mut com: Vec<usize> = (0..n).collect();
        if two_m <= W::zero() {
            return Ok((com, false));
        }
        let mut total = strength.clone();
        let mut link = vec![W::zero(); n];
        let mut touched: Vec<usize> = Vec::new();
        let mut moved_any = false;
        let mut passes = 0;
        loop {
            passes += 1;
            if passes > max_passes {
                return Err(passes - 1);
            }
            let mut moved = false;
            for i in 0..n {
                let own = com[i];
                let k_i = strength[i];
                touched.clear();
                touched.push(own);
                link[own] = W::zero();
                for &(j, w) in &self.adjacency[i] {
                    let c = com[j];
                    if link[c] == W::zero() && !touched.contains(&c) {
                        touched.push(c);
                    }
                    link[c] = link[c] + w;
                }
                total[own] = total[own] - k_i;
                let gain = |c: usize, link: &[W], total: &[W]| link[c] - resolution * total[c] * k_i / two_m;
                let mut best = own;
                let mut best_gain = gain(own, &link, &total);
                for &c in &touched[1..] {
                    let g = gain(c, &link, &total);
                    if g.definitely_gt(best_gain) {
                        best = c;
                        best_gain = g;
                    }
                }
                total[best] = total[best] + k_i;
                com[i] = best;
                for &c in &touched {
                    link[c] = W::zero();
                }
                if best != own {
                    moved = true;
                    moved_any = true;
                }
            }
            if !moved {
                break;
            }
        }
        Ok((renumber(&com), moved_any))
    }

    fn aggregate(&self, com: &[usize]) -> Level<W> {
        let k = com.iter().copied().max().map_or(0, |m| m + 1);
        let mut loops = vec![W::zero(); k];
        let mut adjacency: Vec<Vec<(usize, W)>> = vec![Vec::new(); k];
        let mut slot: Vec<Vec<usize>> = vec![Vec::new(); k];
        for i in 0..self.len() {
            let ci = com[i];
            loops[ci] = loops[ci] + self.loops[i];
            for &(j, w) in &self.adjacency[i] {
                let cj = com[j];
                if ci == cj {
                    loops[ci] = loops[ci] + w;
                    continue;
                }
                match slot[ci].iter().position(|&s| adjacency[ci][s].0 == cj) {
                    Some(p) => {
                        let s = slot[ci][p];
                        adjacency[ci][s].1 = adjacency[ci][s].1 + w;
                    }
                    None => {
                        slot[ci].push(adjacency[ci].len());
                        adjacency[ci].push((cj, w));
                    }
                }
            }
        }
        Level { adjacency, loops }
    }
}

fn renumber(com: &[usize]) -> Vec<usize> {
    let mut map = vec![usize::MAX; com.len()];
    let mut next = 0;
    com.iter()
        .map(|&c| {
            if map[c] == usize::MAX {
                map[c] = next;
                next += 1;
            }
            map[c]
        })
        .collect()
}

impl Louvain {
    /// Runs Louvain and also returns per-level modularity (before, after).
    pub fn run<W: Weight>(&self, g: &Graph<W>) -> Result<(Vec<usize>, LouvainTrace), usize> {
        let resolution = W::of(self.resolution);
        let mut level = Level::from_graph(g);
        let mut membership: Vec<usize> = (0..g.node_count()).collect();
        let mut trace = LouvainTrace::default();
        loop {
            let identity: Vec<usize> = (0..level.len()).collect();
            let before = level.modularity(&identity, resolution);
            let (com, moved) = level.local_moving(resolution, self.max_passes)?;
            if !moved {
                break;
            }
            let after = level.modularity(&com, resolution);
            trace.levels.push((before.as_f64(), after.as_f64()));
            for m in membership.iter_mut() {
                *m = com[*m];
            }
            level = level.aggregate(&com);
        }
        Ok((membership, trace))
    }
}

impl<W: Weight> CommunityDetector<W> for Louvain {
    fn algorithm(&self) -> Algorithm {
        Algorithm::Louvain
    }

    fn detect_labels(&self, g: &Graph<W>, seed: u64) -> Result<Vec<usize>, CommunityError> {
        self.run(g).map(|(labels, _)| labels).map_err(|iterations| CommunityError::NoConvergence {
            algorithm: Algorithm::Louvain,
            iterations,
            seed,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::community::modularity_of_labels;
    use crate::graph::shuffle;

    fn caveman() -> Graph<f64> {
        let mut edges = Vec::new();
        for c in 0..4 {
            for i in 0..5 {
                for j in i + 1..5 {
                    edges.push((format!("c{c}v{i}"), format!("c{c}v{j}"), 1.0));
                }
            }
            edges.push((format!("c{c}v0"), format!("c{}v1", (c + 1) % 4), 0.5));
        }
        Graph::from_weighted_edges(2020, &edges).unwrap()
    }

    #[test]
    fn levels_never_decrease_modularity() {
        for seed in 0..20 {
            let g = shuffle(&caveman(), seed);
            let (labels, trace) = Louvain::default().run(&g).unwrap();
            assert!(!trace.levels.is_empty());
            for (before, after) in &trace.levels {
                assert!(after >= before, "{before} -> {after}");
            }
            let q = modularity_of_labels(&g, &labels, 1.0);
            assert!((q - trace.levels.last().unwrap().1).abs() < 1e-12);
        }
    }

    #[test]
    fn caveman_cliques_recovered() {
        let g = caveman();
        let (labels, _) = Louvain::default().run(&g).unwrap();
        assert_eq!(labels.iter().max(), Some(&3));
    }

    #[test]
    fn high_resolution_splits_more() {
        let g = caveman();
        let coarse = Louvain { resolution: 0.05, ..Louvain::default() }.run(&g).unwrap().0;
        let fine = Louvain { resolution: 1.0, ..Louvain::default() }.run(&g).unwrap().0;
        assert!(coarse.iter().max() < fine.iter().max());
    }

    #[test]
    fn works_in_f32() {
        let edges: Vec<(String, String, f32)> = caveman()
            .canonical_edges()
            .into_iter()
            .map(|(a, b, w)| (a, b, w as f32))
            .collect();
        let g = Graph::from_weighted_edges(2020, &edges).unwrap();
        let (labels, _) = Louvain::default().run(&g).unwrap();
        assert_eq!(labels.iter().max(), Some(&3));
    }
}
