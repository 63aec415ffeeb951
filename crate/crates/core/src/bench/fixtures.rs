//! Constructed inputs shared by the oracle suites and the integration tests.

use rand::seq::IndexedRandom;
use rand::Rng;

use crate::dcc::SparseSolution;
use crate::graph_store::{DynamicGraph, NodeId};
use crate::stream::{SourceGraph, StreamEvent};

/// Adjacent `u = 0`, `v = 1` sharing `common` neighbors, with `u_only` and
/// `v_only` private neighbors each. Under the closed convention
/// `|N[u] △ N[v]| = u_only + v_only` and `max = common + 2 + max(u_only, v_only)`.
pub fn agreement_pair(common: usize, u_only: usize, v_only: usize) -> (DynamicGraph, NodeId, NodeId) {
    let (u, v) = (NodeId(0), NodeId(1));
    let mut g = DynamicGraph::new();
    g.insert_node(u, &[]).unwrap();
    g.insert_node(v, &[u]).unwrap();
    let mut next = 2u64;
    let mut add = |g: &mut DynamicGraph, nbrs: &[NodeId]| {
        g.insert_node(NodeId(next), nbrs).unwrap();
        next += 1;
    };
    for _ in 0..common {
        add(&mut g, &[u, v]);
    }
    for _ in 0..u_only {
        add(&mut g, &[u]);
    }
    for _ in 0..v_only {
        add(&mut g, &[v]);
    }
    (g, u, v)
}

/// Node `u = 0` inside a clique `{u} ∪ S ∪ D` with `|S| = agreeing`,
/// `|D| = disagreeing`. Every node of `D` is also joined to a shared
/// independent set `P` of size `private`, so `S` matches `u` exactly while
/// each `d ∈ D` differs from `u` by `|P|`.
pub fn heavy_star(agreeing: usize, disagreeing: usize, private: usize) -> (DynamicGraph, NodeId) {
    let u = NodeId(0);
    let mut g = DynamicGraph::new();
    g.insert_node(u, &[]).unwrap();
    let mut clique = vec![u];
    for i in 0..(agreeing + disagreeing) as u64 {
        let id = NodeId(1 + i);
        g.insert_node(id, &clique).unwrap();
        clique.push(id);
    }
    let d_nodes: Vec<NodeId> = clique[1 + agreeing..].to_vec();
    for i in 0..private as u64 {
        g.insert_node(NodeId(1 + (agreeing + disagreeing) as u64 + i), &d_nodes).unwrap();
    }
    (g, u)
}

/// Smallest `|P|` that puts every `d ∈ D` of [`heavy_star`] out of
/// `epsilon`-agreement with `u` (closed convention).
pub fn heavy_star_private_size(agreeing: usize, disagreeing: usize, epsilon: f64) -> usize {
    let base = 1 + agreeing + disagreeing;
    (0..).find(|&p| p as f64 >= epsilon * (base + p) as f64).unwrap()
}

/// A random sparse solution on `n` nodes that satisfies both extraction
/// preconditions: nodes are split into groups, each group has a hub joined
/// to all of the group's anchors, every other non-anchor hangs off at least
/// one anchor of its group, and anchors of a group may also be joined.
pub fn random_sparse_solution<R: Rng + ?Sized>(n: usize, rng: &mut R) -> (SparseSolution, Vec<NodeId>) {
    let nodes: Vec<NodeId> = (0..n as u64).map(NodeId).collect();
    let mut sol = SparseSolution::new();
    let mut i = 0;
    while i < n {
        let size = rng.random_range(1..=(n - i).min(40));
        let group = &nodes[i..i + size];
        i += size;
        if size == 1 {
            sol.set_anchor(group[0]);
            continue;
        }
        let anchors = rng.random_range(1..size);
        let (a, rest) = group.split_at(anchors);
        for &x in a {
            sol.set_anchor(x);
        }
        let hub = rest[0];
        for &x in a {
            sol.add_edge(x, hub);
        }
        for &w in &rest[1..] {
            let links = rng.random_range(1..=a.len().min(3));
            for &x in a.choose_multiple(rng, links) {
                sol.add_edge(x, w);
            }
        }
        for (j, &x) in a.iter().enumerate() {
            for &y in &a[j + 1..] {
                if rng.random_bool(0.2) {
                    sol.add_edge(x, y);
                }
            }
        }
    }
    // present nodes in shuffled order; extraction must not depend on it
    let mut present = nodes;
    for j in (1..present.len()).rev() {
        present.swap(j, rng.random_range(0..=j));
    }
    (sol, present)
}

/// A small random graph of 3 to 9 nodes: a third of the time a disjoint union
/// of cliques, otherwise `G(n, p)` with `p` from a sparse-to-dense ladder.
pub fn small_graph<R: Rng + ?Sized>(rng: &mut R) -> SourceGraph {
    let n = rng.random_range(3..=9u32);
    let mut pairs = Vec::new();
    if rng.random_bool(1.0 / 3.0) {
        let mut block = vec![0u32; n as usize];
        let k = rng.random_range(1..=3u32);
        for b in block.iter_mut() {
            *b = rng.random_range(0..k);
        }
        for a in 0..n {
            for c in a + 1..n {
                if block[a as usize] == block[c as usize] {
                    pairs.push((a, c));
                }
            }
        }
    } else {
        let p = *[0.15, 0.3, 0.5, 0.7, 0.9].choose(rng).unwrap();
        for a in 0..n {
            for c in a + 1..n {
                if rng.random_bool(p) {
                    pairs.push((a, c));
                }
            }
        }
    }
    SourceGraph::from_pairs(n as usize, pairs)
}

/// True if every connected component is a clique.
pub fn is_union_of_cliques(g: &DynamicGraph) -> bool {
    g.nodes().iter().all(|&u| {
        let nb = g.neighbors(u).unwrap();
        nb.iter().all(|&v| {
            let nv = g.neighbors(v).unwrap();
            nv.len() == nb.len() && nb.iter().all(|&w| w == v || nv.contains(&w))
        })
    })
}

/// Random insert/delete mix over a bounded id space. Inserts attach to a
/// random number of present nodes, sometimes to a large share of them so
/// that several notify levels are exercised.
pub fn fuzz_events<R: Rng + ?Sized>(count: usize, max_present: usize, rng: &mut R) -> Vec<StreamEvent> {
    let mut present: Vec<NodeId> = Vec::new();
    let mut next = 0u64;
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let delete = !present.is_empty() && (present.len() >= max_present || rng.random_bool(0.35));
        if delete {
            let i = rng.random_range(0..present.len());
            out.push(StreamEvent::Delete { node: present.swap_remove(i) });
        } else {
            let share = if rng.random_bool(0.2) { 0.6 } else { 0.05 };
            let mut edges: Vec<NodeId> = present.iter().copied().filter(|_| rng.random_bool(share)).collect();
            edges.sort_unstable();
            let id = NodeId(next);
            next += 1;
            present.push(id);
            out.push(StreamEvent::Insert { node: id, edges });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extraction::check_preconditions;
    use crate::probes::{exact_agreement, symmetric_difference, Convention};
    use crate::rng_from_seed;

    #[test]
    fn agreement_pair_geometry() {
        let (g, u, v) = agreement_pair(10, 3, 1);
        assert_eq!(symmetric_difference(&g, u, v, Convention::Closed).unwrap(), 4);
        assert_eq!(g.degree(u).unwrap(), 14);
        assert_eq!(g.degree(v).unwrap(), 12);
    }

    #[test]
    fn heavy_star_geometry() {
        let p = heavy_star_private_size(80, 20, 0.2);
        assert_eq!(p, 26);
        let (g, u) = heavy_star(80, 20, p);
        let nb = g.neighbors(u).unwrap().to_vec();
        let agreeing = nb.iter().filter(|&&v| exact_agreement(&g, u, v, 0.2, Convention::Closed).unwrap()).count();
        assert_eq!(agreeing, 80);
        let tight = nb.iter().filter(|&&v| exact_agreement(&g, u, v, 0.02, Convention::Closed).unwrap()).count();
        assert_eq!(tight, 80);
    }

    #[test]
    fn generated_solutions_meet_preconditions() {
        let mut rng = rng_from_seed(9);
        for _ in 0..50 {
            let n = rng.random_range(1..200);
            let (sol, present) = random_sparse_solution(n, &mut rng);
            assert!(check_preconditions(&sol, &present).holds());
        }
    }

    #[test]
    fn clique_union_detection() {
        let mut rng = rng_from_seed(1);
        let mut seen = [0; 2];
        for _ in 0..60 {
            let g = small_graph(&mut rng).to_graph();
            seen[is_union_of_cliques(&g) as usize] += 1;
        }
        assert!(seen[0] > 0 && seen[1] > 0);
    }
}
