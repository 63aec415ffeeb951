//! Dynamic Pivot stand-in.
//!
//! Keeps the greedy Pivot clustering for a fixed random priority per node: a
//! node is a pivot iff no lower-priority neighbor is a pivot, otherwise it
//! joins its lowest-priority pivot neighbor. After an event only nodes whose
//! pivot status could have changed are recomputed, in priority order.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::Rng;
use rustc_hash::{FxHashMap, FxHashSet};

use super::pivot::Priority;
use crate::error::GraphError;
use crate::extraction::ClusterLabels;
use crate::graph_store::{DynamicGraph, NodeId};
use crate::stream::StreamEvent;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PivotCounters {
    /// Node recomputations plus adjacency entries scanned by them.
    pub touched: u64,
    /// Label changes of nodes other than the event's own node.
    pub reassignments: u64,
    pub recomputations: u64,
}

#[derive(Debug)]
pub struct DynamicPivot {
    graph: DynamicGraph,
    priority: FxHashMap<NodeId, Priority>,
    /// Pivot each node currently belongs to (itself for pivots).
    leader: FxHashMap<NodeId, NodeId>,
    counters: PivotCounters,
}

impl Default for DynamicPivot {
    fn default() -> Self {
        Self::new()
    }
}

impl DynamicPivot {
    pub fn new() -> Self {
        Self {
            graph: DynamicGraph::new(),
            priority: FxHashMap::default(),
            leader: FxHashMap::default(),
            counters: PivotCounters::default(),
        }
    }

    pub fn graph(&self) -> &DynamicGraph {
        &self.graph
    }

    pub fn counters(&self) -> PivotCounters {
        self.counters
    }

    pub fn priorities(&self) -> &FxHashMap<NodeId, Priority> {
        &self.priority
    }

    pub fn is_pivot(&self, u: NodeId) -> bool {
        self.leader.get(&u) == Some(&u)
    }

    pub fn leader(&self, u: NodeId) -> Option<NodeId> {
        self.leader.get(&u).copied()
    }

    /// Draws a fresh priority for an inserted node.
    pub fn observe<R: Rng + ?Sized>(&mut self, event: &StreamEvent, rng: &mut R) -> Result<(), GraphError> {
        match event {
            StreamEvent::Insert { node, edges } => self.insert(*node, edges, rng.random()),
            StreamEvent::Delete { node } => self.delete(*node),
        }
    }

    pub fn insert(&mut self, u: NodeId, edges: &[NodeId], priority: Priority) -> Result<(), GraphError> {
        self.graph.insert_node(u, edges)?;
        self.priority.insert(u, priority);
        self.settle(vec![u], u);
        Ok(())
    }

    pub fn delete(&mut self, u: NodeId) -> Result<(), GraphError> {
        let was_pivot = self.is_pivot(u);
        let former = self.graph.delete_node(u)?;
        self.leader.remove(&u);
        let pu = self.key(u);
        self.priority.remove(&u);
        if was_pivot {
            let dirty: Vec<NodeId> = former.into_iter().filter(|&v| self.key(v) > pu).collect();
            self.settle(dirty, u);
        }
        Ok(())
    }

    pub fn labels(&self) -> ClusterLabels {
        ClusterLabels::from_pairs(self.leader.iter().map(|(&u, &p)| (u, p.0 as usize)))
    }

    /// Recomputes every node in the heap in ascending priority, pushing
    /// higher-priority neighbors whenever a pivot status flips.
    fn settle(&mut self, seeds: Vec<NodeId>, origin: NodeId) {
        let mut heap: BinaryHeap<Reverse<(Priority, NodeId)>> = BinaryHeap::new();
        let mut queued: FxHashSet<NodeId> = FxHashSet::default();
        for s in seeds {
            if queued.insert(s) {
                heap.push(Reverse(self.key(s)));
            }
        }
        while let Some(Reverse((_, x))) = heap.pop() {
            queued.remove(&x);
            let kx = self.key(x);
            let nbrs = self.graph.neighbors(x).expect("queued nodes are present");
            self.counters.recomputations += 1;
            self.counters.touched += 1 + nbrs.len() as u64;
            let mut best: Option<(Priority, NodeId)> = None;
            for &y in nbrs {
                let ky = self.key(y);
                if ky < kx && self.leader.get(&y) == Some(&y) && best.is_none_or(|b| ky < b) {
                    best = Some(ky);
                }
            }
            let new_leader = best.map_or(x, |(_, p)| p);
            let old_leader = self.leader.insert(x, new_leader);
            if x != origin && old_leader.is_some() && old_leader != Some(new_leader) {
                self.counters.reassignments += 1;
            }
            let was_pivot = old_leader == Some(x);
            if was_pivot != (new_leader == x) {
                for &y in self.graph.neighbors(x).expect("present") {
                    let ky = self.key(y);
                    if ky > kx && queued.insert(y) {
                        heap.push(Reverse(ky));
                    }
                }
            }
        }
    }

    fn key(&self, u: NodeId) -> (Priority, NodeId) {
        (self.priority[&u], u)
    }

    pub fn check_invariants(&self) -> Result<(), String> {
        for &u in self.graph.nodes() {
            let ku = self.key(u);
            let lowest = self
                .graph
                .neighbors(u)
                .map_err(|e| e.to_string())?
                .iter()
                .filter(|&&y| self.is_pivot(y) && self.key(y) < ku)
                .min_by_key(|&&y| self.key(y))
                .copied();
            let expected = lowest.unwrap_or(u);
            if self.leader.get(&u) != Some(&expected) {
                return Err(format!("node {u}: leader {:?}, expected {expected}", self.leader.get(&u)));
            }
        }
        if self.leader.len() != self.graph.node_count() {
            return Err("leader map out of sync with graph".into());
        }
        Ok(())
    }
}
