use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{CommunityError, Partition};

/// Agreement between two partitions of the same node set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Similarity {
    /// Adjusted Rand Index in `[-1, 1]`; the reported similarity.
    pub ari: f64,
    /// Normalised mutual information (arithmetic-mean normalisation) in `[0, 1]`.
    pub nmi: f64,
}

fn aligned(a: &Partition, b: &Partition) -> Result<(Vec<usize>, Vec<usize>), CommunityError> {
    if a.node_count() != b.node_count() {
        return Err(CommunityError::NodeSetMismatch);
    }
    let mut xs = Vec::with_capacity(a.node_count());
    let mut ys = Vec::with_capacity(a.node_count());
    for ((ia, ca), (ib, cb)) in a.assignment.iter().zip(&b.assignment) {
        if ia != ib {
            return Err(CommunityError::NodeSetMismatch);
        }
        xs.push(*ca);
        ys.push(*cb);
    }
    Ok((xs, ys))
}

type Margin = HashMap<usize, f64>;

fn contingency(xs: &[usize], ys: &[usize]) -> (HashMap<(usize, usize), f64>, Margin, Margin) {
    let mut joint = HashMap::new();
    let mut rows = HashMap::new();
    let mut cols = HashMap::new();
    for (&x, &y) in xs.iter().zip(ys) {
        *joint.entry((x, y)).or_insert(0.0) += 1.0;
        *rows.entry(x).or_insert(0.0) += 1.0;
        *cols.entry(y).or_insert(0.0) += 1.0;
    }
    (joint, rows, cols)
}

fn pairs(n: f64) -> f64 {
    n * (n - 1.0) / 2.0
}

/// Adjusted Rand Index of two label vectors. Returns 1 when the index is
/// undefined (both labelings are all-singletons or all-in-one).
pub fn adjusted_rand_index(xs: &[usize], ys: &[usize]) -> f64 {
    let n = xs.len() as f64;
    let (joint, rows, cols) = contingency(xs, ys);
    let index: f64 = joint.values().map(|&c| pairs(c)).sum();
    let a: f64 = rows.values().map(|&c| pairs(c)).sum();
    let b: f64 = cols.values().map(|&c| pairs(c)).sum();
    let total = pairs(n);
    if total == 0.0 {
        return 1.0;
    }
    let expected = a * b / total;
    let max = (a + b) / 2.0;
    if max == expected {
        return 1.0;
    }
    (index - expected) / (max - expected)
}

/// NMI with arithmetic-mean normalisation `2 I / (H_x + H_y)`; 1 when both entropies vanish.
pub fn normalized_mutual_information(xs: &[usize], ys: &[usize]) -> f64 {
    let n = xs.len() as f64;
    let (joint, rows, cols) = contingency(xs, ys);
    let entropy = |m: &HashMap<usize, f64>| -> f64 { -m.values().map(|&c| (c / n) * (c / n).ln()).sum::<f64>() };
    let hx = entropy(&rows);
    let hy = entropy(&cols);
    if hx + hy == 0.0 {
        return 1.0;
    }
    let mi: f64 = joint
        .iter()
        .map(|(&(x, y), &c)| (c / n) * ((c * n) / (rows[&x] * cols[&y])).ln())
        .sum();
    (2.0 * mi / (hx + hy)).clamp(0.0, 1.0)
}

/// ARI and NMI between partitions of the same organisations.
pub fn similarity(a: &Partition, b: &Partition) -> Result<Similarity, CommunityError> {
    let (xs, ys) = aligned(a, b)?;
    Ok(Similarity {
        ari: adjusted_rand_index(&xs, &ys),
        nmi: normalized_mutual_information(&xs, &ys),
    })
}
