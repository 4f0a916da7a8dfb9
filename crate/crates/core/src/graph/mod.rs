//! Weighted undirected one-mode collaboration networks.
//!
//! A [`Graph`] keeps its nodes and edges in an explicit storage order. All
//! algorithms in this crate walk that order, which is what makes
//! [`shuffle`] meaningful for probing input-ordering bias.

mod export;
mod projection;

use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Weight;

pub use export::{write_edge_list, write_graphml};
pub use projection::{project_one_mode, split_by_label, LabelSplit, OrgDirectory, OrgInfo, Projection, ProjectionRule};

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("node absent: {0}")]
    NodeAbsent(String),
    #[error("self-loop on {0} is not allowed")]
    SelfLoop(String),
    #[error("edge {0}-{1} has non-positive or non-finite weight")]
    BadWeight(String, String),
    #[error("weight matrix for {0} has no entries")]
    EmptyMatrix(i32),
}

/// Per-node values filled in after centrality analysis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CentralitySlot<W> {
    pub degree: usize,
    pub strength: W,
    pub coreness: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeAttrs<W> {
    pub id: String,
    pub name: String,
    pub country: String,
    /// Value from projects in which the organisation was the only weighted participant.
    pub solo_weight: W,
    /// Number of projects the organisation takes part in this year.
    pub participations: usize,
    pub centrality: Option<CentralitySlot<W>>,
    pub community: Option<usize>,
}

impl<W: Weight> NodeAttrs<W> {
    pub fn new(id: impl Into<String>) -> Self {
        NodeAttrs {
            id: id.into(),
            name: String::new(),
            country: String::new(),
            solo_weight: W::zero(),
            participations: 0,
            centrality: None,
            community: None,
        }
    }
}

/// Undirected edge between two node indices; `a != b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge<W> {
    pub a: usize,
    pub b: usize,
    pub weight: W,
}

/// Simple weighted undirected graph with positive edge weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph<W> {
    year: i32,
    nodes: Vec<NodeAttrs<W>>,
    edges: Vec<Edge<W>>,
    adjacency: Vec<Vec<(usize, W)>>,
    index: HashMap<String, usize>,
}

impl<W: Weight> Graph<W> {
    /// Assembles a graph; edges must be unique unordered pairs without loops.
    fn assemble(year: i32, nodes: Vec<NodeAttrs<W>>, edges: Vec<Edge<W>>) -> Self {
        let mut adjacency = vec![Vec::new(); nodes.len()];
        for e in &edges {
            adjacency[e.a].push((e.b, e.weight));
            adjacency[e.b].push((e.a, e.weight));
        }
        let index = nodes.iter().enumerate().map(|(i, n)| (n.id.clone(), i)).collect();
        Graph {
            year,
            nodes,
            edges,
            adjacency,
            index,
        }
    }

    /// Builds a graph from `(u, v, weight)` triples. Repeated pairs accumulate;
    /// nodes are created in order of first mention.
    pub fn from_weighted_edges<S: AsRef<str>>(year: i32, edges: &[(S, S, W)]) -> Result<Self, GraphError> {
        let mut b = GraphBuilder::new(year);
        for (u, v, w) in edges {
            b.add_edge(u.as_ref(), v.as_ref(), *w)?;
        }
        Ok(b.build())
    }

    pub fn year(&self) -> i32 {
        self.year
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[NodeAttrs<W>] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> &NodeAttrs<W> {
        &self.nodes[i]
    }

    pub fn edges(&self) -> &[Edge<W>] {
        &self.edges
    }

    /// Neighbours of node `i` with edge weights, in storage order.
    pub fn neighbors(&self, i: usize) -> &[(usize, W)] {
        &self.adjacency[i]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn require(&self, id: &str) -> Result<usize, GraphError> {
        self.index_of(id).ok_or_else(|| GraphError::NodeAbsent(id.to_string()))
    }

    pub fn total_edge_weight(&self) -> W {
        self.edges.iter().map(|e| e.weight).sum()
    }

    pub fn total_solo_weight(&self) -> W {
        self.nodes.iter().map(|n| n.solo_weight).sum()
    }

    /// Sum of incident edge weights of node `i`.
    pub fn weighted_degree(&self, i: usize) -> W {
        self.adjacency[i].iter().map(|&(_, w)| w).sum()
    }

    /// Edges as `(lo_id, hi_id, weight)` sorted by ids: independent of storage order.
    pub fn canonical_edges(&self) -> Vec<(String, String, W)> {
        let mut out: Vec<_> = self
            .edges
            .iter()
            .map(|e| {
                let (x, y) = (&self.nodes[e.a].id, &self.nodes[e.b].id);
                if x <= y {
                    (x.clone(), y.clone(), e.weight)
                } else {
                    (y.clone(), x.clone(), e.weight)
                }
            })
            .collect();
        out.sort_by(|p, q| (&p.0, &p.1).cmp(&(&q.0, &q.1)));
        out
    }

    /// Node ids in storage order.
    pub fn node_ids(&self) -> impl Iterator<Item = &str> {
        self.nodes.iter().map(|n| n.id.as_str())
    }

    /// Labels each connected component; labels are numbered in storage order.
    pub fn components(&self) -> Vec<usize> {
        let n = self.node_count();
        let mut label = vec![usize::MAX; n];
        let mut next = 0;
        let mut stack = Vec::new();
        for s in 0..n {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = next;
            stack.push(s);
            while let Some(u) = stack.pop() {
                for &(v, _) in &self.adjacency[u] {
                    if label[v] == usize::MAX {
                        label[v] = next;
                        stack.push(v);
                    }
                }
            }
            next += 1;
        }
        label
    }

    /// Subgraph induced by `members` (indices into this graph), keeping the
    /// given member order and the parent's edge storage order.
    pub fn induced_subgraph(&self, members: &[usize]) -> Graph<W> {
        let mut local = vec![usize::MAX; self.node_count()];
        for (k, &m) in members.iter().enumerate() {
            local[m] = k;
        }
        let nodes = members.iter().map(|&m| self.nodes[m].clone()).collect();
        let edges = self
            .edges
            .iter()
            .filter(|e| local[e.a] != usize::MAX && local[e.b] != usize::MAX)
            .map(|e| Edge {
                a: local[e.a],
                b: local[e.b],
                weight: e.weight,
            })
            .collect();
        Graph::assemble(self.year, nodes, edges)
    }

    /// Same topology with nodes stored in `order` (new position k holds old node `order[k]`).
    pub fn permuted(&self, order: &NodeOrder) -> Graph<W> {
        let mut new_pos = vec![0; self.node_count()];
        for (k, &old) in order.permutation.iter().enumerate() {
            new_pos[old] = k;
        }
        let nodes = order.permutation.iter().map(|&old| self.nodes[old].clone()).collect();
        let edges = self
            .edges
            .iter()
            .map(|e| Edge {
                a: new_pos[e.a],
                b: new_pos[e.b],
                weight: e.weight,
            })
            .collect();
        Graph::assemble(self.year, nodes, edges)
    }

    pub fn set_centrality(&mut self, values: &[CentralitySlot<W>]) {
        for (node, v) in self.nodes.iter_mut().zip(values) {
            node.centrality = Some(*v);
        }
    }

    pub fn set_communities(&mut self, labels: &[usize]) {
        for (node, &c) in self.nodes.iter_mut().zip(labels) {
            node.community = Some(c);
        }
    }
}

/// Incremental graph construction keyed by organisation id.
#[derive(Debug, Clone)]
pub struct GraphBuilder<W> {
    year: i32,
    nodes: Vec<NodeAttrs<W>>,
    index: HashMap<String, usize>,
    weights: BTreeMap<(usize, usize), W>,
}

impl<W: Weight> GraphBuilder<W> {
    pub fn new(year: i32) -> Self {
        GraphBuilder {
            year,
            nodes: Vec::new(),
            index: HashMap::new(),
            weights: BTreeMap::new(),
        }
    }

    /// Adds (or returns) the node `id`.
    pub fn add_node(&mut self, id: &str) -> usize {
        if let Some(&i) = self.index.get(id) {
            return i;
        }
        let i = self.nodes.len();
        self.nodes.push(NodeAttrs::new(id));
        self.index.insert(id.to_string(), i);
        i
    }

    pub fn node_mut(&mut self, id: &str) -> &mut NodeAttrs<W> {
        let i = self.add_node(id);
        &mut self.nodes[i]
    }

    /// Adds `weight` to the undirected edge `u`–`v`.
    pub fn add_edge(&mut self, u: &str, v: &str, weight: W) -> Result<(), GraphError> {
        if u == v {
            return Err(GraphError::SelfLoop(u.to_string()));
        }
        if !(weight.is_finite() && weight > W::zero()) {
            return Err(GraphError::BadWeight(u.to_string(), v.to_string()));
        }
        let (a, b) = (self.add_node(u), self.add_node(v));
        let key = if a < b { (a, b) } else { (b, a) };
        let slot = self.weights.entry(key).or_insert_with(W::zero);
        *slot = *slot + weight;
        Ok(())
    }

    pub fn build(self) -> Graph<W> {
        let edges = self
            .weights
            .into_iter()
            .map(|((a, b), weight)| Edge { a, b, weight })
            .collect();
        Graph::assemble(self.year, self.nodes, edges)
    }
}

/// A seeded permutation of node storage positions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeOrder {
    pub permutation: Vec<usize>,
    pub seed: u64,
}

impl NodeOrder {
    pub fn random(n: usize, seed: u64) -> Self {
        let mut permutation: Vec<usize> = (0..n).collect();
        permutation.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        NodeOrder { permutation, seed }
    }

    pub fn is_valid(&self) -> bool {
        let mut seen = vec![false; self.permutation.len()];
        self.permutation
            .iter()
            .all(|&i| i < seen.len() && !std::mem::replace(&mut seen[i], true))
    }
}

/// Returns `g` with node order, edge order and edge orientation permuted by
/// a PRNG seeded with `seed`. Topology and weights are unchanged.
pub fn shuffle<W: Weight>(g: &Graph<W>, seed: u64) -> Graph<W> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let order = NodeOrder::random(g.node_count(), rng.random());
    let mut out = g.permuted(&order);
    out.edges.shuffle(&mut rng);
    for e in &mut out.edges {
        if rng.random::<bool>() {
            std::mem::swap(&mut e.a, &mut e.b);
        }
    }
    Graph::assemble(out.year, out.nodes, out.edges)
}
