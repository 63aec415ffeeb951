//! The live positive graph `G_t` behind the degree / edge / neighbor-sample
//! query interface.

use std::fmt;

use rand::Rng;
use rustc_hash::FxHashMap;

use crate::error::GraphError;

/// Stable node identifier. Assigned once per stream and never recycled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u64);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl From<u64> for NodeId {
    fn from(v: u64) -> Self {
        NodeId(v)
    }
}

/// Dense array plus position map. Insert, remove (swap-remove), membership
/// and uniform sampling are all O(1) expected.
///
/// Iteration order depends only on the sequence of operations applied, so a
/// fixed seed gives a fixed order.
#[derive(Clone, Debug, Default)]
pub struct NeighborSet {
    items: Vec<NodeId>,
    pos: FxHashMap<NodeId, u32>,
}

impl NeighborSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.pos.contains_key(&v)
    }

    /// Returns false if `v` was already present.
    pub fn insert(&mut self, v: NodeId) -> bool {
        if self.pos.contains_key(&v) {
            return false;
        }
        self.pos.insert(v, self.items.len() as u32);
        self.items.push(v);
        true
    }

    /// Returns false if `v` was absent.
    pub fn remove(&mut self, v: NodeId) -> bool {
        let Some(i) = self.pos.remove(&v) else {
            return false;
        };
        let i = i as usize;
        let last = self.items.pop().expect("position map and array out of sync");
        if i < self.items.len() {
            self.items[i] = last;
            self.pos.insert(last, i as u32);
        }
        true
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<NodeId> {
        if self.items.is_empty() {
            None
        } else {
            Some(self.items[rng.random_range(0..self.items.len())])
        }
    }

    pub fn as_slice(&self) -> &[NodeId] {
        &self.items
    }

    pub fn iter(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.items.iter().copied()
    }

    pub fn clear(&mut self) {
        self.items.clear();
        self.pos.clear();
    }
}

/// The positive graph. Negative edges are implicit non-edges.
#[derive(Clone, Debug, Default)]
pub struct DynamicGraph {
    active: NeighborSet,
    adjacency: FxHashMap<NodeId, NeighborSet>,
    edge_count: usize,
}

impl DynamicGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn node_count(&self) -> usize {
        self.active.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn contains(&self, u: NodeId) -> bool {
        self.adjacency.contains_key(&u)
    }

    /// Present nodes, in a deterministic (operation-history) order.
    pub fn nodes(&self) -> &[NodeId] {
        self.active.as_slice()
    }

    pub fn sorted_nodes(&self) -> Vec<NodeId> {
        let mut v = self.active.as_slice().to_vec();
        v.sort_unstable();
        v
    }

    pub fn random_node<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<NodeId> {
        self.active.sample(rng)
    }

    fn adj(&self, u: NodeId) -> Result<&NeighborSet, GraphError> {
        self.adjacency.get(&u).ok_or(GraphError::UnknownNode(u))
    }

    /// Adds `id` together with its edges to already-present nodes.
    pub fn insert_node(&mut self, id: NodeId, neighbors: &[NodeId]) -> Result<(), GraphError> {
        if self.contains(id) {
            return Err(GraphError::DuplicateNode(id));
        }
        let mut set = NeighborSet::new();
        for &v in neighbors {
            if v == id {
                return Err(GraphError::SelfLoop(id));
            }
            if !self.contains(v) {
                return Err(GraphError::UnknownNode(v));
            }
            if !set.insert(v) {
                return Err(GraphError::DuplicateNeighbor { node: id, neighbor: v });
            }
        }
        for &v in neighbors {
            self.adjacency
                .get_mut(&v)
                .expect("checked above")
                .insert(id);
        }
        self.edge_count += set.len();
        self.adjacency.insert(id, set);
        self.active.insert(id);
        Ok(())
    }

    /// Removes `id` and its edges; returns the neighbor list at deletion time.
    pub fn delete_node(&mut self, id: NodeId) -> Result<Vec<NodeId>, GraphError> {
        let set = self.adjacency.remove(&id).ok_or(GraphError::UnknownNode(id))?;
        for v in set.iter() {
            self.adjacency
                .get_mut(&v)
                .expect("symmetric adjacency")
                .remove(id);
        }
        self.edge_count -= set.len();
        self.active.remove(id);
        Ok(set.items)
    }

    pub fn degree(&self, u: NodeId) -> Result<usize, GraphError> {
        Ok(self.adj(u)?.len())
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> Result<bool, GraphError> {
        let a = self.adj(u)?;
        if !self.contains(v) {
            return Err(GraphError::UnknownNode(v));
        }
        Ok(a.contains(v))
    }

    pub fn sample_neighbor<R: Rng + ?Sized>(&self, u: NodeId, rng: &mut R) -> Result<NodeId, GraphError> {
        self.adj(u)?.sample(rng).ok_or(GraphError::ZeroDegree(u))
    }

    pub fn neighbors(&self, u: NodeId) -> Result<&[NodeId], GraphError> {
        Ok(self.adj(u)?.as_slice())
    }

    pub(crate) fn neighbor_set(&self, u: NodeId) -> Result<&NeighborSet, GraphError> {
        self.adj(u)
    }

    /// Checks symmetry, loop-freeness and the edge-count identity.
    pub fn check_invariants(&self) -> Result<(), String> {
        if self.active.len() != self.adjacency.len() {
            return Err(format!(
                "active set has {} nodes, adjacency has {}",
                self.active.len(),
                self.adjacency.len()
            ));
        }
        let mut degree_sum = 0usize;
        for (&u, set) in &self.adjacency {
            if !self.active.contains(u) {
                return Err(format!("{u} has adjacency but is not active"));
            }
            if set.len() != set.pos.len() {
                return Err(format!("{u}: neighbor array and position map disagree"));
            }
            for (i, v) in set.iter().enumerate() {
                if v == u {
                    return Err(format!("self-loop at {u}"));
                }
                if set.pos.get(&v) != Some(&(i as u32)) {
                    return Err(format!("{u}: stale position for {v}"));
                }
                match self.adjacency.get(&v) {
                    Some(back) if back.contains(u) => {}
                    _ => return Err(format!("edge {u}-{v} is not symmetric")),
                }
            }
            degree_sum += set.len();
        }
        if degree_sum != 2 * self.edge_count {
            return Err(format!(
                "edge_count {} but degree sum {}",
                self.edge_count, degree_sum
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng_from_seed;

    fn n(i: u64) -> NodeId {
        NodeId(i)
    }

    fn complete(k: u64) -> DynamicGraph {
        let mut g = DynamicGraph::new();
        for i in 0..k {
            let nbrs: Vec<_> = (0..i).map(n).collect();
            g.insert_node(n(i), &nbrs).unwrap();
        }
        g
    }

    #[test]
    fn insert_with_neighbors() {
        let mut g = DynamicGraph::new();
        g.insert_node(n(1), &[]).unwrap();
        g.insert_node(n(2), &[]).unwrap();
        g.insert_node(n(3), &[n(1), n(2)]).unwrap();
        assert_eq!(g.degree(n(3)).unwrap(), 2);
        assert_eq!(g.degree(n(1)).unwrap(), 1);
        g.insert_node(n(7), &[]).unwrap();
        assert_eq!(g.degree(n(7)).unwrap(), 0);
    }

    #[test]
    fn k4_edge_count_and_queries() {
        let mut g = complete(4);
        // C(4,2)
        assert_eq!(g.edge_count(), 6);
        for i in 0..4 {
            assert_eq!(g.degree(n(i)).unwrap(), 3);
            let mut nb = g.neighbors(n(i)).unwrap().to_vec();
            nb.sort();
            let expect: Vec<_> = (0..4).filter(|&j| j != i).map(n).collect();
            assert_eq!(nb, expect);
        }
        assert!(g.has_edge(n(0), n(3)).unwrap());
        assert!(!g.has_edge(n(2), n(2)).unwrap());
        g.insert_node(n(4), &[n(0), n(1), n(2), n(3)]).unwrap();
        assert_eq!(g.edge_count(), 10);
        g.delete_node(n(4)).unwrap();
        assert_eq!(g.edge_count(), 6);
        g.check_invariants().unwrap();
    }

    #[test]
    fn insert_errors_are_distinct() {
        let mut g = complete(2);
        assert_eq!(g.insert_node(n(0), &[]), Err(GraphError::DuplicateNode(n(0))));
        assert_eq!(g.insert_node(n(5), &[n(9)]), Err(GraphError::UnknownNode(n(9))));
        assert_eq!(g.insert_node(n(5), &[n(5)]), Err(GraphError::SelfLoop(n(5))));
        assert_eq!(
            g.insert_node(n(5), &[n(0), n(0)]),
            Err(GraphError::DuplicateNeighbor { node: n(5), neighbor: n(0) })
        );
        // failed inserts leave no trace
        assert!(!g.contains(n(5)));
        assert_eq!(g.degree(n(0)).unwrap(), 1);
        g.check_invariants().unwrap();
    }

    #[test]
    fn star_center_deletion() {
        let mut g = DynamicGraph::new();
        g.insert_node(n(0), &[]).unwrap();
        for i in 1..=5 {
            g.insert_node(n(i), &[n(0)]).unwrap();
        }
        let gone = g.delete_node(n(0)).unwrap();
        assert_eq!(gone.len(), 5);
        assert_eq!(g.edge_count(), 0);
        for i in 1..=5 {
            assert!(g.neighbors(n(i)).unwrap().is_empty());
        }
        g.insert_node(n(9), &[]).unwrap();
        assert!(g.delete_node(n(9)).unwrap().is_empty());
        assert_eq!(g.delete_node(n(9)), Err(GraphError::UnknownNode(n(9))));
    }

    #[test]
    fn path_queries() {
        let mut g = DynamicGraph::new();
        g.insert_node(n(0), &[]).unwrap();
        g.insert_node(n(1), &[n(0)]).unwrap();
        g.insert_node(n(2), &[n(1)]).unwrap();
        assert_eq!(g.degree(n(0)).unwrap(), 1);
        assert!(!g.has_edge(n(0), n(2)).unwrap());
        assert_eq!(g.has_edge(n(0), n(7)), Err(GraphError::UnknownNode(n(7))));
    }

    #[test]
    fn sample_errors_and_degree_one() {
        let mut g = DynamicGraph::new();
        let mut rng = rng_from_seed(1);
        g.insert_node(n(0), &[]).unwrap();
        assert_eq!(g.sample_neighbor(n(0), &mut rng), Err(GraphError::ZeroDegree(n(0))));
        assert_eq!(g.sample_neighbor(n(3), &mut rng), Err(GraphError::UnknownNode(n(3))));
        g.insert_node(n(1), &[n(0)]).unwrap();
        for _ in 0..100 {
            assert_eq!(g.sample_neighbor(n(0), &mut rng).unwrap(), n(1));
        }
    }

    #[test]
    fn two_neighbor_frequencies() {
        // 99.99% binomial interval for p = 1/2, N = 1e4 is about 0.5 +- 0.0195,
        // well inside [0.45, 0.55].
        let mut g = DynamicGraph::new();
        g.insert_node(n(1), &[]).unwrap();
        g.insert_node(n(2), &[]).unwrap();
        g.insert_node(n(0), &[n(1), n(2)]).unwrap();
        let mut rng = rng_from_seed(42);
        let hits = (0..10_000)
            .filter(|_| g.sample_neighbor(n(0), &mut rng).unwrap() == n(1))
            .count();
        let f = hits as f64 / 10_000.0;
        assert!((0.45..=0.55).contains(&f), "frequency {f}");
    }

    #[test]
    fn deleted_node_never_reappears() {
        let mut g = complete(5);
        g.delete_node(n(2)).unwrap();
        for i in [0, 1, 3, 4] {
            assert!(!g.neighbors(n(i)).unwrap().contains(&n(2)));
        }
        assert_eq!(g.has_edge(n(0), n(2)), Err(GraphError::UnknownNode(n(2))));
    }
}
