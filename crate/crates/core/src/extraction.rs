//! Cluster extraction from a sparse solution in `O(|V|)`, plus a BFS oracle.

use std::collections::VecDeque;
use std::fmt::Write as _;

use rustc_hash::{FxHashMap, FxHashSet};

use crate::dcc::SparseSolution;
use crate::graph_store::NodeId;

/// Node -> cluster id. Ids carry no meaning beyond equality.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ClusterLabels {
    map: FxHashMap<NodeId, usize>,
}

impl ClusterLabels {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (NodeId, usize)>) -> Self {
        Self { map: pairs.into_iter().collect() }
    }

    pub fn set(&mut self, u: NodeId, label: usize) {
        self.map.insert(u, label);
    }

    pub fn get(&self, u: NodeId) -> Option<usize> {
        self.map.get(&u).copied()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, usize)> + '_ {
        self.map.iter().map(|(&u, &l)| (u, l))
    }

    /// Clusters as sorted node lists, ordered by smallest member.
    pub fn clusters(&self) -> Vec<Vec<NodeId>> {
        let mut by_label: FxHashMap<usize, Vec<NodeId>> = FxHashMap::default();
        for (&u, &l) in &self.map {
            by_label.entry(l).or_default().push(u);
        }
        let mut out: Vec<Vec<NodeId>> = by_label.into_values().collect();
        for c in &mut out {
            c.sort_unstable();
        }
        out.sort_unstable();
        out
    }

    pub fn cluster_count(&self) -> usize {
        self.map.values().collect::<FxHashSet<_>>().len()
    }

    /// Same partition of the same node set, up to relabeling.
    pub fn same_partition(&self, other: &ClusterLabels) -> bool {
        if self.map.len() != other.map.len() {
            return false;
        }
        let mut fwd: FxHashMap<usize, usize> = FxHashMap::default();
        let mut back: FxHashMap<usize, usize> = FxHashMap::default();
        for (&u, &a) in &self.map {
            let Some(&b) = other.map.get(&u) else { return false };
            if *fwd.entry(a).or_insert(b) != b || *back.entry(b).or_insert(a) != a {
                return false;
            }
        }
        true
    }

    /// Two-column `node,cluster` CSV sorted by node.
    pub fn to_csv(&self) -> String {
        let mut rows: Vec<_> = self.iter().collect();
        rows.sort_unstable();
        let mut out = String::from("node,cluster\n");
        for (u, l) in rows {
            writeln!(out, "{u},{l}").unwrap();
        }
        out
    }
}

/// Which preconditions of the fast extraction were violated.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PreconditionReport {
    /// Present nodes outside every anchor's closed `G̃`-neighborhood.
    pub uncovered: Vec<NodeId>,
    /// Same-component anchor pairs whose closed `G̃`-neighborhoods are disjoint.
    pub disjoint_anchor_pairs: Vec<(NodeId, NodeId)>,
}

impl PreconditionReport {
    pub fn holds(&self) -> bool {
        self.uncovered.is_empty() && self.disjoint_anchor_pairs.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct Extraction {
    pub labels: ClusterLabels,
    /// Writes to the label function, for the `O(|V|)` bound.
    pub assignments: usize,
    /// Unlabeled non-anchors with no adjacent anchor, made singletons.
    pub fresh_singletons: usize,
}

/// Anchor flooding with conflict merging. Anchors are visited in ascending id
/// order; each floods its unlabeled `G̃`-neighbors with a fresh id until it
/// meets an already-labeled neighbor, at which point everything flooded so far
/// takes that neighbor's label. Remaining nodes copy the label of an adjacent
/// anchor, or become singletons.
pub fn compute_components(sol: &SparseSolution, present: &[NodeId]) -> Extraction {
    let mut f: FxHashMap<NodeId, usize> = FxHashMap::default();
    let mut assignments = 0usize;
    let mut next_id = 0usize;
    let mut done: FxHashSet<NodeId> = FxHashSet::default();
    let mut flooded: Vec<NodeId> = Vec::new();

    for u in sol.sorted_anchors() {
        if done.contains(&u) {
            continue;
        }
        let id = next_id;
        next_id += 1;
        f.insert(u, id);
        assignments += 1;
        flooded.clear();
        flooded.push(u);
        for &v in sol.neighbors(u) {
            match f.get(&v) {
                None => {
                    f.insert(v, id);
                    assignments += 1;
                    flooded.push(v);
                }
                Some(&existing) => {
                    for &w in &flooded {
                        f.insert(w, existing);
                        assignments += 1;
                    }
                    break;
                }
            }
        }
        for &w in &flooded {
            if sol.is_anchor(w) {
                done.insert(w);
            }
        }
    }

    let mut labels = ClusterLabels::new();
    let mut fresh_singletons = 0;
    let mut sorted: Vec<NodeId> = present.to_vec();
    sorted.sort_unstable();
    for v in sorted {
        let label = match f.get(&v) {
            Some(&l) => l,
            None => match sol.phi_of(v).first() {
                Some(r) => {
                    assignments += 1;
                    f[r]
                }
                None => {
                    fresh_singletons += 1;
                    next_id += 1;
                    next_id - 1
                }
            },
        };
        labels.set(v, label);
    }
    Extraction { labels, assignments, fresh_singletons }
}

/// Connected components of `G̃` restricted to `present`, by BFS.
pub fn components_bfs(sol: &SparseSolution, present: &[NodeId]) -> ClusterLabels {
    let mut labels = ClusterLabels::new();
    let mut sorted: Vec<NodeId> = present.to_vec();
    sorted.sort_unstable();
    let mut next = 0;
    let mut queue = VecDeque::new();
    for s in sorted {
        if labels.get(s).is_some() {
            continue;
        }
        labels.set(s, next);
        queue.push_back(s);
        while let Some(x) = queue.pop_front() {
            for &y in sol.neighbors(x) {
                if labels.get(y).is_none() {
                    labels.set(y, next);
                    queue.push_back(y);
                }
            }
        }
        next += 1;
    }
    labels
}

/// Checks the two conditions under which `compute_components` provably
/// matches the connected components.
pub fn check_preconditions(sol: &SparseSolution, present: &[NodeId]) -> PreconditionReport {
    let mut report = PreconditionReport::default();
    for &v in present {
        if !sol.is_anchor(v) && sol.phi_of(v).is_empty() {
            report.uncovered.push(v);
        }
    }
    report.uncovered.sort_unstable();
    let comp = components_bfs(sol, present);
    let anchors = sol.sorted_anchors();
    let closed = |a: NodeId| -> FxHashSet<NodeId> { sol.neighbors(a).iter().copied().chain([a]).collect() };
    let nbhds: Vec<FxHashSet<NodeId>> = anchors.iter().map(|&a| closed(a)).collect();
    for i in 0..anchors.len() {
        for j in i + 1..anchors.len() {
            if comp.get(anchors[i]) == comp.get(anchors[j]) && nbhds[i].is_disjoint(&nbhds[j]) {
                report.disjoint_anchor_pairs.push((anchors[i], anchors[j]));
            }
        }
    }
    report
}
