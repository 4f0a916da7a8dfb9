//! Asynchronous weighted label propagation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Algorithm, CommunityDetector, CommunityError};
use crate::graph::Graph;
use crate::scalar::Weight;

/// Every node starts with its own label and repeatedly adopts the label with
/// the largest incident weight among its neighbours. Nodes are swept in
/// storage order; ties between maximal labels are broken uniformly at random
/// from the trial seed. Stops once every node holds a maximal label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LabelPropagation {
    pub max_iterations: usize,
}

impl Default for LabelPropagation {
    fn default() -> Self {
        LabelPropagation { max_iterations: 1000 }
    }
}

/// Labels of maximal weight around `u`, in order of first appearance.
fn dominant_labels<W: Weight>(g: &Graph<W>, labels: &[usize], u: usize, score: &mut [W], seen: &mut Vec<usize>, out: &mut Vec<usize>) {
    seen.clear();
    out.clear();
    for &(v, w) in g.neighbors(u) {
        let l = labels[v];
        if score[l] == W::zero() {
            seen.push(l);
        }
        score[l] = score[l] + w;
    }
    let best = seen.iter().map(|&l| score[l]).fold(W::zero(), W::max);
    for &l in seen.iter() {
        if !best.definitely_gt(score[l]) {
            out.push(l);
        }
    }
    for &l in seen.iter() {
        score[l] = W::zero();
    }
}

impl<W: Weight> CommunityDetector<W> for LabelPropagation {
    fn algorithm(&self) -> Algorithm {
        Algorithm::LabelPropagation
    }

    fn detect_labels(&self, g: &Graph<W>, seed: u64) -> Result<Vec<usize>, CommunityError> {
        let n = g.node_count();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut labels: Vec<usize> = (0..n).collect();
        let mut score = vec![W::zero(); n];
        let mut seen = Vec::new();
        let mut best = Vec::new();
        for _ in 0..self.max_iterations {
            for u in 0..n {
                dominant_labels(g, &labels, u, &mut score, &mut seen, &mut best);
                match best.len() {
                    0 => {}
                    1 => labels[u] = best[0],
                    k => labels[u] = best[rng.random_range(0..k)],
                }
            }
            let stable = (0..n).all(|u| {
                dominant_labels(g, &labels, u, &mut score, &mut seen, &mut best);
                best.is_empty() || best.contains(&labels[u])
            });
            if stable {
                return Ok(labels);
            }
        }
        Err(CommunityError::NoConvergence {
            algorithm: Algorithm::LabelPropagation,
            iterations: self.max_iterations,
            seed,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heavier_side_wins() {
        // c is pulled to {a, b} (weights 3 + 3) rather than {d, e} (1 + 1).
        let g = Graph::from_weighted_edges(
            2020,
            &[("a", "b", 5.0), ("a", "c", 3.0), ("b", "c", 3.0), ("c", "d", 1.0), ("c", "e", 1.0), ("d", "e", 5.0)],
        )
        .unwrap();
        for seed in 0..10 {
            let l = LabelPropagation::default().detect_labels(&g, seed).unwrap();
            assert_eq!(l[0], l[2]);
            assert_eq!(l[3], l[4]);
            assert_ne!(l[2], l[3]);
        }
    }

    #[test]
    fn ties_depend_on_seed() {
        // A ring of unit weights is full of ties.
        let edges: Vec<(String, String, f64)> = (0..30).map(|i| (format!("r{i:02}"), format!("r{:02}", (i + 1) % 30), 1.0)).collect();
        let g = Graph::from_weighted_edges(2020, &edges).unwrap();
        let results: std::collections::HashSet<Vec<usize>> = (0..20)
            .map(|s| LabelPropagation::default().detect_labels(&g, s).unwrap())
            .collect();
        assert!(results.len() > 1);
    }

    #[test]
    fn isolated_nodes_keep_their_label() {
        let mut b = crate::graph::GraphBuilder::<f64>::new(2020);
        b.add_node("x");
        b.add_node("y");
        let l = LabelPropagation::default().detect_labels(&b.build(), 0).unwrap();
        assert_eq!(l, vec![0, 1]);
    }
}
