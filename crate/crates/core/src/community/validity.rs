use serde::{Deserialize, Serialize};

use super::{CommunityError, Partition};
use crate::graph::Graph;
use crate::scalar::Weight;

/// Communities whose mixing parameter exceeds this are invalid.
pub const MAX_MIXING: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CommunityValidity {
    pub community: usize,
    pub size: usize,
    /// The subgraph induced by the members is connected.
    #[serde(rename = "connectedOK")]
    pub connected_ok: bool,
    /// External incident weight over total incident weight of the members.
    pub mixing_parameter: f64,
}

impl CommunityValidity {
    pub fn is_valid(&self) -> bool {
        self.connected_ok && self.mixing_parameter <= MAX_MIXING
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ValidityReport {
    pub partition_key: String,
    pub communities: Vec<CommunityValidity>,
    pub singleton_count: usize,
    pub valid: bool,
}

/// Per-community connectivity and mixing for labels `0..k` in storage order.
pub fn validate_labels<W: Weight>(g: &Graph<W>, labels: &[usize]) -> Vec<CommunityValidity> {
    let k = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (v, &c) in labels.iter().enumerate() {
        members[c].push(v);
    }
    let mut external = vec![W::zero(); k];
    let mut total = vec![W::zero(); k];
    for u in 0..g.node_count() {
        let cu = labels[u];
        for &(v, w) in g.neighbors(u) {
            total[cu] = total[cu] + w;
            if labels[v] != cu {
                external[cu] = external[cu] + w;
            }
        }
    }
    let mut seen = vec![false; g.node_count()];
    let mut stack = Vec::new();
    members
        .iter()
        .enumerate()
        .map(|(c, group)| {
            let mut reached = 0;
            if let Some(&start) = group.first() {
                seen[start] = true;
                stack.push(start);
                while let Some(u) = stack.pop() {
                    reached += 1;
                    for &(v, _) in g.neighbors(u) {
                        if labels[v] == c && !seen[v] {
                            seen[v] = true;
                            stack.push(v);
                        }
                    }
                }
            }
            let mixing = if total[c] > W::zero() {
                (external[c] / total[c]).as_f64()
            } else {
                0.0
            };
            CommunityValidity {
                community: c,
                size: group.len(),
                connected_ok: reached == group.len(),
                mixing_parameter: mixing,
            }
        })
        .collect()
}

/// Checks that every community is internally connected and has mixing ≤ 0.5.
pub fn validate<W: Weight>(g: &Graph<W>, p: &Partition) -> Result<ValidityReport, CommunityError> {
    let labels = p.labels_for(g)?;
    let communities = validate_labels(g, &labels);
    Ok(ValidityReport {
        partition_key: p.canonical_key.clone(),
        singleton_count: communities.iter().filter(|c| c.size == 1).count(),
        valid: communities.iter().all(CommunityValidity::is_valid),
        communities,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::community::Algorithm;
    use crate::graph::GraphBuilder;

    fn partition<W: Weight>(g: &Graph<W>, groups: &[&[&str]]) -> Partition {
        let labels: Vec<usize> = g
            .node_ids()
            .map(|id| groups.iter().position(|grp| grp.contains(&id)).unwrap())
            .collect();
        Partition::from_graph_labels(g, &labels, Algorithm::Walktrap, 0)
    }

    #[test]
    fn components_are_valid() {
        let g = Graph::from_weighted_edges(2020, &[("a", "b", 1.0), ("b", "c", 1.0), ("x", "y", 3.0)]).unwrap();
        let r = validate(&g, &partition(&g, &[&["a", "b", "c"], &["x", "y"]])).unwrap();
        assert!(r.valid);
        assert!(r.communities.iter().all(|c| c.connected_ok && c.mixing_parameter == 0.0));
        assert_eq!(r.singleton_count, 0);
    }

    #[test]
    fn community_without_internal_edge_is_disconnected() {
        let g = Graph::from_weighted_edges(2020, &[("a", "c", 1.0), ("b", "c", 1.0)]).unwrap();
        let r = validate(&g, &partition(&g, &[&["a", "b"], &["c"]])).unwrap();
        assert!(!r.communities[0].connected_ok);
        assert!(!r.valid);
        assert_eq!(r.singleton_count, 1);
    }

    #[test]
    fn high_mixing_is_invalid() {
        // community {a, b}: internal edge weight 1 (counted from both ends = 2),
        // boundary weight 6 across three external edges
        let g = Graph::from_weighted_edges(
            2020,
            &[("a", "b", 1.0), ("a", "x", 2.0), ("b", "y", 2.0), ("a", "z", 2.0), ("x", "y", 5.0), ("y", "z", 5.0), ("z", "w", 5.0)],
        )
        .unwrap();
        let r = validate(&g, &partition(&g, &[&["a", "b"], &["x", "y", "z", "w"]])).unwrap();
        let ab = &r.communities[0];
        assert!(ab.connected_ok);
        assert!((ab.mixing_parameter - 0.75).abs() < 1e-12);
        assert!(!r.valid);
    }

    #[test]
    fn mixing_point_six_fixture() {
        // Community {a, b, c}: internal edge weight 2 (seen from both ends: 4),
        // boundary weight 6, so mixing = 6 / 10.
        let mut b = GraphBuilder::<f64>::new(2020);
        b.add_edge("a", "b", 1.0).unwrap();
        b.add_edge("b", "c", 1.0).unwrap();
        b.add_edge("a", "d", 2.0).unwrap();
        b.add_edge("b", "e", 2.0).unwrap();
        b.add_edge("c", "f", 2.0).unwrap();
        b.add_edge("d", "e", 4.0).unwrap();
        b.add_edge("e", "f", 4.0).unwrap();
        let g = b.build();
        let r = validate(&g, &partition(&g, &[&["a", "b", "c"], &["d", "e", "f"]])).unwrap();
        assert!((r.communities[0].mixing_parameter - 0.6).abs() < 1e-12);
        assert!(!r.valid);
    }
}
