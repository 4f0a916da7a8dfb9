use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{Algorithm, CommunityError};
use crate::graph::Graph;
use crate::scalar::Weight;

/// Assignment of every node of one yearly graph to exactly one community.
///
/// Community indices are normalised: walking organisation ids in sorted order,
/// communities are numbered by first appearance. Two partitions that differ
/// only by relabelling therefore have identical `assignment` maps.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub year: i32,
    pub assignment: BTreeMap<String, usize>,
    pub k: usize,
    pub algorithm: Algorithm,
    pub seed: u64,
    pub canonical_key: String,
}

impl Partition {
    /// Builds a partition from arbitrary community labels, one per id.
    pub fn from_labels<'a>(
        year: i32,
        ids: impl IntoIterator<Item = &'a str>,
        labels: impl IntoIterator<Item = usize>,
        algorithm: Algorithm,
        seed: u64,
    ) -> Partition {
        let raw: BTreeMap<&str, usize> = ids.into_iter().zip(labels).collect();
        let mut renumber: BTreeMap<usize, usize> = BTreeMap::new();
        let mut assignment = BTreeMap::new();
        for (id, label) in raw {
            let next = renumber.len();
            let c = *renumber.entry(label).or_insert(next);
            assignment.insert(id.to_string(), c);
        }
        let k = renumber.len();
        let mut p = Partition {
            year,
            assignment,
            k,
            algorithm,
            seed,
            canonical_key: String::new(),
        };
        p.canonical_key = canonicalize(&p);
        p
    }

    /// Partition of `g` from per-node labels given in storage order.
    pub fn from_graph_labels<W: Weight>(g: &Graph<W>, labels: &[usize], algorithm: Algorithm, seed: u64) -> Partition {
        Partition::from_labels(g.year(), g.node_ids(), labels.iter().copied(), algorithm, seed)
    }

    pub fn node_count(&self) -> usize {
        self.assignment.len()
    }

    pub fn community_of(&self, id: &str) -> Option<usize> {
        self.assignment.get(id).copied()
    }

    /// Member ids of each community, sorted; index = community number.
    pub fn communities(&self) -> Vec<Vec<&str>> {
        let mut out = vec![Vec::new(); self.k];
        for (id, &c) in &self.assignment {
            out[c].push(id.as_str());
        }
        out
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut out = vec![0; self.k];
        for &c in self.assignment.values() {
            out[c] += 1;
        }
        out
    }

    /// Community of each node of `g` in storage order.
    pub fn labels_for<W: Weight>(&self, g: &Graph<W>) -> Result<Vec<usize>, CommunityError> {
        if g.node_count() != self.node_count() {
            return Err(CommunityError::CoverageMismatch {
                graph_nodes: g.node_count(),
                partition_nodes: self.node_count(),
            });
        }
        g.node_ids()
            .map(|id| {
                self.community_of(id).ok_or_else(|| CommunityError::CoverageMismatch {
                    graph_nodes: g.node_count(),
                    partition_nodes: self.node_count(),
                })
            })
            .collect()
    }

    /// True when both partitions group the same ids identically.
    pub fn same_grouping(&self, other: &Partition) -> bool {
        self.assignment == other.assignment
    }
}

/// Order-independent fingerprint: SHA-256 over the sorted list of sorted
/// member sets, truncated to 128 bits and hex encoded.
pub fn canonicalize(p: &Partition) -> String {
    let mut groups: BTreeMap<usize, Vec<&str>> = BTreeMap::new();
    for (id, &c) in &p.assignment {
        groups.entry(c).or_default().push(id.as_str());
    }
    let mut sets: Vec<Vec<&str>> = groups.into_values().collect();
    for s in &mut sets {
        s.sort_unstable();
    }
    sets.sort();
    let mut hasher = Sha256::new();
    for set in &sets {
        for id in set {
            hasher.update(id.as_bytes());
            hasher.update([0x1f]);
        }
        hasher.update([0x1e]);
    }
    hex::encode(&hasher.finalize()[..16])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(pairs: &[(&str, usize)]) -> Partition {
        Partition::from_labels(
            2020,
            pairs.iter().map(|x| x.0),
            pairs.iter().map(|x| x.1),
            Algorithm::Louvain,
            0,
        )
    }

    #[test]
    fn swapped_indices_same_key() {
        let a = p(&[("a", 0), ("b", 0), ("c", 1)]);
        let b = p(&[("a", 5), ("b", 5), ("c", 2)]);
        assert_eq!(a.canonical_key, b.canonical_key);
        assert_eq!(a.assignment, b.assignment);
        assert_eq!(a.k, 2);
    }

    #[test]
    fn moving_a_node_changes_key() {
        let a = p(&[("a", 0), ("b", 0), ("c", 1)]);
        let b = p(&[("a", 0), ("b", 1), ("c", 1)]);
        assert_ne!(a.canonical_key, b.canonical_key);
    }

    #[test]
    fn storage_order_does_not_matter() {
        let a = p(&[("a", 0), ("b", 0), ("c", 1), ("d", 2)]);
        let b = p(&[("d", 9), ("c", 3), ("b", 1), ("a", 1)]);
        assert_eq!(a.canonical_key, b.canonical_key);
        assert_eq!(canonicalize(&a), a.canonical_key);
    }

    #[test]
    fn communities_numbered_by_first_sorted_member() {
        let a = p(&[("z", 0), ("a", 1), ("m", 0)]);
        assert_eq!(a.communities(), vec![vec!["a"], vec!["m", "z"]]);
        assert_eq!(a.sizes(), vec![1, 2]);
    }
}
