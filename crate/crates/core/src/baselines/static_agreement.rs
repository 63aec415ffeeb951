use std::collections::VecDeque;

use rustc_hash::FxHashMap;

use crate::extraction::ClusterLabels;
use crate::graph_store::{DynamicGraph, NodeId};
use crate::probes::{exact_agreement, Convention};

/// Offline agreement decomposition with exact neighborhoods: keep edges whose
/// endpoints agree and at least one endpoint is heavy, then take components.
pub fn static_agreement(g: &DynamicGraph, epsilon: f64, conv: Convention) -> ClusterLabels {
    let nodes = g.sorted_nodes();
    let mut agreeing: FxHashMap<NodeId, Vec<NodeId>> = FxHashMap::default();
    for &u in &nodes {
        for &v in g.neighbors(u).expect("present") {
            if u < v && exact_agreement(g, u, v, epsilon, conv).expect("present") {
                agreeing.entry(u).or_default().push(v);
                agreeing.entry(v).or_default().push(u);
            }
        }
    }
    let heavy = |u: NodeId| {
        let d = g.degree(u).expect("present");
        d > 0 && agreeing.get(&u).map_or(0, Vec::len) as f64 > (1.0 - epsilon) * d as f64
    };

    let mut labels = ClusterLabels::new();
    let mut next = 0;
    let mut queue = VecDeque::new();
    for &s in &nodes {
        if labels.get(s).is_some() {
            continue;
        }
        labels.set(s, next);
        queue.push_back(s);
        while let Some(x) = queue.pop_front() {
            let hx = heavy(x);
            for &y in agreeing.get(&x).map_or(&[][..], Vec::as_slice) {
                if labels.get(y).is_none() && (hx || heavy(y)) {
                    labels.set(y, next);
                    queue.push_back(y);
                }
            }
        }
        next += 1;
    }
    labels
}

pub fn singletons(g: &DynamicGraph) -> ClusterLabels {
    ClusterLabels::from_pairs(g.sorted_nodes().into_iter().enumerate().map(|(i, u)| (u, i)))
}
