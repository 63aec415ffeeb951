use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::extraction::ClusterLabels;
use crate::graph_store::DynamicGraph;

/// Disagreements of a clustering: positive edges cut between clusters plus
/// missing (negative) pairs inside clusters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CostBreakdown {
    pub cross_positive: u64,
    pub intra_negative: u64,
    pub total: u64,
}

impl CostBreakdown {
    fn new(cross_positive: u64, intra_negative: u64) -> Self {
        Self { cross_positive, intra_negative, total: cross_positive + intra_negative }
    }
}

/// `O(n + m)`.
pub fn cost(g: &DynamicGraph, labels: &ClusterLabels) -> Result<CostBreakdown> {
    let mut size: FxHashMap<usize, u64> = FxHashMap::default();
    for &u in g.nodes() {
        let l = labels.get(u).ok_or(Error::Unlabeled(u))?;
        *size.entry(l).or_default() += 1;
    }
    let mut cross = 0u64;
    let mut internal = 0u64;
    for &u in g.nodes() {
        let lu = labels.get(u).expect("checked");
        for &v in g.neighbors(u)? {
            if u < v {
                if labels.get(v) == Some(lu) {
                    internal += 1;
                } else {
                    cross += 1;
                }
            }
        }
    }
    let pairs: u64 = size.values().map(|&s| s * s.saturating_sub(1) / 2).sum();
    Ok(CostBreakdown::new(cross, pairs - internal))
}
