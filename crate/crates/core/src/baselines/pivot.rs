use rand::Rng;
use rustc_hash::FxHashMap;

use crate::extraction::ClusterLabels;
use crate::graph_store::{DynamicGraph, NodeId};

/// Pivot order key. Lower goes first; ties break on node id.
pub type Priority = u64;

/// Classic Pivot under a uniformly random order.
pub fn pivot<R: Rng + ?Sized>(g: &DynamicGraph, rng: &mut R) -> ClusterLabels {
    let pri: FxHashMap<NodeId, Priority> = g.sorted_nodes().into_iter().map(|u| (u, rng.random())).collect();
    pivot_with_priorities(g, &pri)
}

/// Pivot with a fixed order. Each cluster is labeled by its pivot's id.
///
/// # Panics
/// If a present node has no priority.
pub fn pivot_with_priorities(g: &DynamicGraph, pri: &FxHashMap<NodeId, Priority>) -> ClusterLabels {
    let mut order = g.sorted_nodes();
    order.sort_by_key(|u| (pri[u], *u));
    let mut labels = ClusterLabels::new();
    for u in order {
        if labels.get(u).is_some() {
            continue;
        }
        let id = u.0 as usize;
        labels.set(u, id);
        for &v in g.neighbors(u).expect("present") {
            if labels.get(v).is_none() {
                labels.set(v, id);
            }
        }
    }
    labels
}
