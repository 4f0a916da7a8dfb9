use super::{CommunityError, Partition};
use crate::graph::Graph;
use crate::scalar::Weight;

/// Weighted Newman modularity of per-node `labels` (storage order) with resolution γ:
/// `Q = Σ_c [ in_c / 2m − γ (tot_c / 2m)² ]`. An edgeless graph has `Q = 0`.
pub fn modularity_of_labels<W: Weight>(g: &Graph<W>, labels: &[usize], resolution: W) -> W {
    let k = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut inside = vec![W::zero(); k];
    let mut total = vec![W::zero(); k];
    // `inside` and `total` accumulate the same adjacency walk so that a single
    // community yields exactly Q = 0.
    for u in 0..g.node_count() {
        let cu = labels[u];
        for &(v, w) in g.neighbors(u) {
            total[cu] = total[cu] + w;
            if labels[v] == cu {
                inside[cu] = inside[cu] + w;
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

/// Modularity (γ = 1) of partition `p` on graph `g`.
pub fn modularity<W: Weight>(g: &Graph<W>, p: &Partition) -> Result<W, CommunityError> {
    let labels = p.labels_for(g)?;
    Ok(modularity_of_labels(g, &labels, W::one()))
}
