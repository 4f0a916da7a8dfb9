//! Community detection, modularity, validity checks and partition comparison.

mod label_propagation;
mod louvain;
mod modularity;
mod partition;
mod similarity;
mod validity;
mod walktrap;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::Graph;
use crate::scalar::Weight;

pub use label_propagation::LabelPropagation;
pub use louvain::{Louvain, LouvainTrace};
pub use modularity::{modularity, modularity_of_labels};
pub use partition::{canonicalize, Partition};
pub use similarity::{adjusted_rand_index, normalized_mutual_information, similarity, Similarity};
pub use validity::{validate, validate_labels, CommunityValidity, ValidityReport, MAX_MIXING};
pub use walktrap::{Dendrogram, Merge, Walktrap};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CommunityError {
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error("partition covers {partition_nodes} nodes but graph has {graph_nodes} (or ids differ)")]
    CoverageMismatch { graph_nodes: usize, partition_nodes: usize },
    #[error("partitions are over different node sets")]
    NodeSetMismatch,
    #[error("{algorithm} did not converge within {iterations} iterations (seed {seed})")]
    NoConvergence {
        algorithm: Algorithm,
        iterations: usize,
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Louvain,
    LabelPropagation,
    Walktrap,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Louvain, Algorithm::LabelPropagation, Algorithm::Walktrap];

    pub fn detector<W: Weight>(self, params: &DetectParams) -> Box<dyn CommunityDetector<W>> {
        match self {
            Algorithm::Louvain => Box::new(Louvain {
                resolution: params.resolution,
                max_passes: params.max_iterations,
            }),
            Algorithm::LabelPropagation => Box::new(LabelPropagation {
                max_iterations: params.max_iterations,
            }),
            Algorithm::Walktrap => Box::new(Walktrap {
                walk_length: params.walk_length,
            }),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Louvain => "louvain",
            Algorithm::LabelPropagation => "label-propagation",
            Algorithm::Walktrap => "walktrap",
        })
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "louvain" | "lv" => Ok(Algorithm::Louvain),
            "label-propagation" | "labelpropagation" | "lp" => Ok(Algorithm::LabelPropagation),
            "walktrap" | "wt" => Ok(Algorithm::Walktrap),
            other => Err(format!("unknown algorithm `{other}`")),
        }
    }
}

/// Tunable parameters shared by the detectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectParams {
    /// Louvain resolution γ.
    pub resolution: f64,
    /// Walktrap random-walk length.
    pub walk_length: usize,
    /// Iteration cap (Louvain passes per level, label-propagation sweeps).
    pub max_iterations: usize,
}

impl Default for DetectParams {
    fn default() -> Self {
        DetectParams {
            resolution: 1.0,
            walk_length: 4,
            max_iterations: 1000,
        }
    }
}

/// A community detection algorithm: graph and seed in, one label per node
/// (storage order) out. Implementations must read nodes and edges in storage
/// order and draw all randomness from `seed`.
pub trait CommunityDetector<W: Weight>: Send + Sync {
    fn algorithm(&self) -> Algorithm;

    fn detect_labels(&self, g: &Graph<W>, seed: u64) -> Result<Vec<usize>, CommunityError>;
}

/// Runs `algorithm` on `g` and returns the normalised partition.
pub fn detect<W: Weight>(g: &Graph<W>, algorithm: Algorithm, params: &DetectParams, seed: u64) -> Result<Partition, CommunityError> {
    detect_with(g, algorithm.detector::<W>(params).as_ref(), seed)
}

pub fn detect_with<W: Weight>(g: &Graph<W>, detector: &dyn CommunityDetector<W>, seed: u64) -> Result<Partition, CommunityError> {
    if g.is_empty() {
        return Err(CommunityError::EmptyGraph);
    }
    let labels = detector.detect_labels(g, seed)?;
    Ok(Partition::from_graph_labels(g, &labels, detector.algorithm(), seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphBuilder;

    fn clique(prefix: &str, n: usize, w: f64, b: &mut GraphBuilder<f64>) {
        for i in 0..n {
            for j in i + 1..n {
                b.add_edge(&format!("{prefix}{i}"), &format!("{prefix}{j}"), w).unwrap();
            }
        }
    }

    #[test]
    fn k4_is_one_community_for_every_algorithm() {
        let mut b = GraphBuilder::new(2020);
        clique("k", 4, 1.0, &mut b);
        let g = b.build();
        for a in Algorithm::ALL {
            let p = detect(&g, a, &DetectParams::default(), 1).unwrap();
            assert_eq!(p.k, 1, "{a}");
        }
    }

    #[test]
    fn two_k5_with_light_bridge() {
        let mut b = GraphBuilder::new(2020);
        clique("a", 5, 1.0, &mut b);
        clique("b", 5, 1.0, &mut b);
        b.add_edge("a0", "b0", 0.1).unwrap();
        let g = b.build();
        for a in Algorithm::ALL {
            let p = detect(&g, a, &DetectParams::default(), 3).unwrap();
            assert_eq!(p.k, 2, "{a}");
            assert_eq!(p.community_of("a3"), p.community_of("a0"));
            assert_ne!(p.community_of("a0"), p.community_of("b0"));
        }
    }

    #[test]
    fn components_are_never_bridged() {
        let mut b = GraphBuilder::new(2020);
        clique("x", 3, 1.0, &mut b);
        clique("y", 4, 2.0, &mut b);
        b.add_edge("z0", "z1", 1.0).unwrap();
        let g = b.build();
        let comp = g.components();
        for a in Algorithm::ALL {
            for seed in 0..5 {
                let g2 = crate::graph::shuffle(&g, seed);
                let comp2 = g2.components();
                let labels = detect(&g2, a, &DetectParams::default(), seed).unwrap().labels_for(&g2).unwrap();
                for u in 0..g2.node_count() {
                    for v in 0..g2.node_count() {
                        if labels[u] == labels[v] {
                            assert_eq!(comp2[u], comp2[v], "{a}");
                        }
                    }
                }
            }
        }
        assert_eq!(comp.iter().max(), Some(&2));
    }

    #[test]
    fn same_seed_same_result() {
        let mut b = GraphBuilder::new(2020);
        for i in 0..12 {
            b.add_edge(&format!("n{i}"), &format!("n{}", (i + 1) % 12), 1.0).unwrap();
            b.add_edge(&format!("n{i}"), &format!("n{}", (i + 5) % 12), 0.5).unwrap();
        }
        let g = b.build();
        for a in Algorithm::ALL {
            let p1 = detect(&g, a, &DetectParams::default(), 42).unwrap();
            let p2 = detect(&g, a, &DetectParams::default(), 42).unwrap();
            assert_eq!(p1, p2);
        }
    }

    #[test]
    fn empty_graph_is_rejected() {
        let g = GraphBuilder::<f64>::new(2020).build();
        assert_eq!(detect(&g, Algorithm::Louvain, &DetectParams::default(), 0), Err(CommunityError::EmptyGraph));
    }

    #[test]
    fn algorithm_names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.to_string().parse::<Algorithm>(), Ok(a));
        }
        assert_eq!("WT".parse::<Algorithm>(), Ok(Algorithm::Walktrap));
    }
}
