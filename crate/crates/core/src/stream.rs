//! Source graphs and node streams: edge-list and point-cloud ingestion,
//! synthetic generators, the arrival/deletion stream protocol, and the
//! line-oriented stream format (`I <id> <nbr> ...` / `D <id>`).

use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::graph_store::{DynamicGraph, NeighborSet, NodeId};
use crate::rng_from_seed;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StreamEvent {
    Insert { node: NodeId, edges: Vec<NodeId> },
    Delete { node: NodeId },
}

impl StreamEvent {
    pub fn node(&self) -> NodeId {
        match self {
            StreamEvent::Insert { node, .. } | StreamEvent::Delete { node } => *node,
        }
    }

    pub fn is_insert(&self) -> bool {
        matches!(self, StreamEvent::Insert { .. })
    }
}

/// Undirected simple graph on nodes `0..node_count`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SourceGraph {
    pub node_count: usize,
    /// Each edge once, as `(a, b)` with `a < b`, sorted.
    pub edges: Vec<(u32, u32)>,
    pub points: Option<Vec<Vec<f64>>>,
}

impl SourceGraph {
    /// Builds from arbitrary pairs: drops self-loops and duplicates.
    pub fn from_pairs(node_count: usize, pairs: impl IntoIterator<Item = (u32, u32)>) -> Self {
        let mut edges: Vec<(u32, u32)> = pairs
            .into_iter()
            .filter(|(a, b)| a != b)
            .map(|(a, b)| if a < b { (a, b) } else { (b, a) })
            .collect();
        edges.sort_unstable();
        edges.dedup();
        Self { node_count, edges, points: None }
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn adjacency(&self) -> Vec<Vec<u32>> {
        let mut adj = vec![Vec::new(); self.node_count];
        for &(a, b) in &self.edges {
            adj[a as usize].push(b);
            adj[b as usize].push(a);
        }
        adj
    }

    pub fn average_degree(&self) -> f64 {
        if self.node_count == 0 {
            0.0
        } else {
            2.0 * self.edges.len() as f64 / self.node_count as f64
        }
    }

    /// The whole graph at once, node `i` as `NodeId(i)`.
    pub fn to_graph(&self) -> DynamicGraph {
        let adj = self.adjacency();
        let mut g = DynamicGraph::new();
        for (u, nbrs) in adj.iter().enumerate() {
            let earlier: Vec<NodeId> = nbrs.iter().filter(|&&v| (v as usize) < u).map(|&v| NodeId(v as u64)).collect();
            g.insert_node(NodeId(u as u64), &earlier).expect("source graphs are simple");
        }
        g
    }
}

/// Parses whitespace-separated integer pairs; `#` lines are comments.
/// Ids are compacted to `0..n` in ascending order of the original ids.
pub fn parse_edge_list(text: &str, origin: &str) -> Result<SourceGraph> {
    let mut raw = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut it = line.split_whitespace();
        let mut next = || -> Result<u64> {
            let tok = it.next().ok_or_else(|| Error::Parse {
                path: origin.to_string(),
                line: i + 1,
                msg: "expected two node ids".into(),
            })?;
            tok.parse().map_err(|_| Error::Parse {
                path: origin.to_string(),
                line: i + 1,
                msg: format!("`{tok}` is not a node id"),
            })
        };
        let a = next()?;
        let b = next()?;
        raw.push((a, b));
    }
    let mut ids: Vec<u64> = raw.iter().flat_map(|&(a, b)| [a, b]).collect();
    ids.sort_unstable();
    ids.dedup();
    let index: FxHashMap<u64, u32> = ids.iter().enumerate().map(|(i, &id)| (id, i as u32)).collect();
    Ok(SourceGraph::from_pairs(ids.len(), raw.iter().map(|(a, b)| (index[a], index[b]))))
}

pub fn load_edge_list(path: &Path) -> Result<SourceGraph> {
    let text = std::fs::read_to_string(path)?;
    parse_edge_list(&text, &path.display().to_string())
}

/// One whitespace-separated real vector per line; blank and `#` lines skipped.
pub fn parse_points(text: &str, origin: &str) -> Result<Vec<Vec<f64>>> {
    let mut pts = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let p = line
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>().map_err(|_| Error::Parse {
                    path: origin.to_string(),
                    line: i + 1,
                    msg: format!("`{t}` is not a number"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        pts.push(p);
    }
    Ok(pts)
}

pub fn load_points(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path)?;
    parse_points(&text, &path.display().to_string())
}

fn check_dims(points: &[Vec<f64>]) -> Result<()> {
    if let Some(first) = points.first() {
        for (i, p) in points.iter().enumerate() {
            if p.len() != first.len() {
                return Err(Error::DimensionMismatch { expected: first.len(), found: p.len(), index: i });
            }
        }
    }
    Ok(())
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Edge between `i != j` iff `‖p_i − p_j‖₂ < tau`.
pub fn threshold_graph(points: &[Vec<f64>], tau: f64) -> Result<SourceGraph> {
    check_dims(points)?;
    let mut edges = Vec::new();
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            if sq_dist(&points[i], &points[j]).sqrt() < tau {
                edges.push((i as u32, j as u32));
            }
        }
    }
    Ok(SourceGraph { node_count: points.len(), edges, points: Some(points.to_vec()) })
}

/// Smallest threshold whose graph has average degree at least `target`.
/// Works on the sorted list of pairwise distances, so the result is exact.
pub fn tau_for_average_degree(points: &[Vec<f64>], target: f64) -> Result<f64> {
    check_dims(points)?;
    let n = points.len();
    let mut d: Vec<f64> = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            d.push(sq_dist(&points[i], &points[j]).sqrt());
        }
    }
    if d.is_empty() {
        return Ok(0.0);
    }
    d.sort_unstable_by(f64::total_cmp);
    let want = ((target * n as f64 / 2.0).ceil() as usize).clamp(1, d.len());
    // strict `<`: the threshold must exceed the want-th smallest distance
    let v = d[want - 1];
    Ok(v + v.abs().max(1.0) * 1e-12)
}

/// Stochastic block model with `k` blocks of `s` nodes. Node `i` is in block
/// `i / s`.
pub fn planted_partition(k: usize, s: usize, p_in: f64, p_out: f64, seed: u64) -> SourceGraph {
    let mut rng = rng_from_seed(seed);
    let n = k * s;
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let p = if i / s == j / s { p_in } else { p_out };
            if p >= 1.0 || (p > 0.0 && rng.random_bool(p)) {
                edges.push((i as u32, j as u32));
            }
        }
    }
    SourceGraph { node_count: n, edges, points: None }
}

/// Isotropic Gaussian blobs: `clusters` centers drawn with spread
/// `center_spread`, each point offset by unit-variance noise.
pub fn gaussian_points(n: usize, dim: usize, clusters: usize, center_spread: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = rng_from_seed(seed);
    let normal = Normal::new(0.0, 1.0).expect("valid normal");
    let centers: Vec<Vec<f64>> = (0..clusters.max(1))
        .map(|_| (0..dim).map(|_| normal.sample(&mut rng) * center_spread).collect())
        .collect();
    (0..n)
        .map(|i| {
            let c = &centers[i % centers.len()];
            c.iter().map(|x| x + normal.sample(&mut rng)).collect()
        })
        .collect()
}

/// How deletions are interleaved between two arrivals.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum GapDeletion {
    /// One Bernoulli(p) trial per gap.
    #[default]
    OneCoin,
    /// Keep deleting while the coin lands heads (mean `p / (1 - p)` per gap).
    Geometric,
}

/// Random arrival order; before each arrival delete a uniformly random present
/// node with probability `p_delete`; after the last arrival delete everything
/// left in uniform random order. With `p_delete = 0` the stream is
/// insertion-only and has no deletion tail.
pub fn gen_stream(src: &SourceGraph, p_delete: f64, seed: u64, gap: GapDeletion) -> Result<Vec<StreamEvent>> {
    if !(0.0..1.0).contains(&p_delete) {
        return Err(Error::Config(format!("p_delete must lie in [0, 1), got {p_delete}")));
    }
    let mut rng = rng_from_seed(seed);
    let adj = src.adjacency();
    let mut order: Vec<u32> = (0..src.node_count as u32).collect();
    order.shuffle(&mut rng);

    let mut present = NeighborSet::new();
    let mut events = Vec::with_capacity(2 * src.node_count);
    let delete_one = |present: &mut NeighborSet, events: &mut Vec<StreamEvent>, rng: &mut _| {
        let v = present.sample(rng).expect("nonempty");
        present.remove(v);
        events.push(StreamEvent::Delete { node: v });
    };
    for &u in &order {
        match gap {
            GapDeletion::OneCoin => {
                if !present.is_empty() && p_delete > 0.0 && rng.random_bool(p_delete) {
                    delete_one(&mut present, &mut events, &mut rng);
                }
            }
            GapDeletion::Geometric => {
                while !present.is_empty() && p_delete > 0.0 && rng.random_bool(p_delete) {
                    delete_one(&mut present, &mut events, &mut rng);
                }
            }
        }
        let mut edges: Vec<NodeId> = adj[u as usize]
            .iter()
            .map(|&v| NodeId(v as u64))
            .filter(|&v| present.contains(v))
            .collect();
        edges.sort_unstable();
        let id = NodeId(u as u64);
        present.insert(id);
        events.push(StreamEvent::Insert { node: id, edges });
    }
    while p_delete > 0.0 && !present.is_empty() {
        delete_one(&mut present, &mut events, &mut rng);
    }
    Ok(events)
}

/// Index one past the last insertion (end of the arrival phase).
pub fn arrival_phase_len(events: &[StreamEvent]) -> usize {
    events.iter().rposition(StreamEvent::is_insert).map_or(0, |i| i + 1)
}

pub fn format_stream(events: &[StreamEvent]) -> String {
    let mut out = String::new();
    for e in events {
        match e {
            StreamEvent::Insert { node, edges } => {
                write!(out, "I {node}").unwrap();
                for v in edges {
                    write!(out, " {v}").unwrap();
                }
            }
            StreamEvent::Delete { node } => write!(out, "D {node}").unwrap(),
        }
        out.push('\n');
    }
    out
}

pub fn parse_stream(text: &str, origin: &str) -> Result<Vec<StreamEvent>> {
    let err = |line: usize, msg: String| Error::Parse { path: origin.to_string(), line, msg };
    let mut events = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let mut toks = line.split_whitespace();
        let Some(kind) = toks.next() else { continue };
        let ids = toks
            .map(|t| t.parse::<u64>().map(NodeId).map_err(|_| err(i + 1, format!("`{t}` is not a node id"))))
            .collect::<Result<Vec<_>>>()?;
        let (&node, rest) = ids.split_first().ok_or_else(|| err(i + 1, "missing node id".into()))?;
        match kind {
            "I" => events.push(StreamEvent::Insert { node, edges: rest.to_vec() }),
            "D" if rest.is_empty() => events.push(StreamEvent::Delete { node }),
            "D" => return Err(err(i + 1, "delete takes exactly one id".into())),
            other => return Err(err(i + 1, format!("unknown event kind `{other}`"))),
        }
    }
    Ok(events)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph_store::DynamicGraph;

    #[test]
    fn edge_list_rules() {
        let g = parse_edge_list("0 1\n1 0\n# c\n2 2\n", "t").unwrap();
        assert_eq!(g.node_count, 3);
        assert_eq!(g.edges, vec![(0, 1)]);
        let g = parse_edge_list("", "t").unwrap();
        assert_eq!((g.node_count, g.edge_count()), (0, 0));
        let g = parse_edge_list("0 1\n0 1\n", "t").unwrap();
        assert_eq!(g.edge_count(), 1);
        // compaction keeps ascending order of original ids
        let g = parse_edge_list("10 30\n30 20\n", "t").unwrap();
        assert_eq!(g.edges, vec![(0, 2), (1, 2)]);
    }

    #[test]
    fn edge_list_parse_error_has_line() {
        match parse_edge_list("0 1\n# x\n3 q\n", "f.txt") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(matches!(parse_edge_list("5\n", "f"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn threshold_cases() {
        let pts = vec![vec![0.0], vec![1.0], vec![3.0]];
        // distances 1, 2, 3
        assert_eq!(threshold_graph(&pts, 1.5).unwrap().edges, vec![(0, 1)]);
        assert_eq!(threshold_graph(&pts, 0.0).unwrap().edge_count(), 0);
        assert_eq!(threshold_graph(&pts, f64::INFINITY).unwrap().edge_count(), 3);
        let bad = vec![vec![0.0, 1.0], vec![1.0]];
        assert!(matches!(threshold_graph(&bad, 1.0), Err(Error::DimensionMismatch { index: 1, .. })));
    }

    #[test]
    fn tau_hits_target_degree() {
        let pts = gaussian_points(200, 4, 5, 3.0, 1);
        for target in [5.0, 20.0, 60.0] {
            let tau = tau_for_average_degree(&pts, target).unwrap();
            let g = threshold_graph(&pts, tau).unwrap();
            let avg = g.average_degree();
            assert!(avg >= target && avg < target + 0.05, "target {target}, got {avg}");
        }
    }

    #[test]
    fn planted_partition_extremes() {
        let g = planted_partition(3, 5, 1.0, 0.0, 7);
        assert_eq!(g.edge_count(), 3 * 10);
        assert!(g.edges.iter().all(|&(a, b)| a / 5 == b / 5));
        let g = planted_partition(2, 4, 0.0, 0.0, 7);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn intra_block_edge_moments() {
        // Binomial(C(20,2)=190, 0.3): mean 57, sd sqrt(190·0.3·0.7) ≈ 6.32.
        // The mean of 100 blocks has sd 0.632; allow 4 of those.
        let mut total = 0usize;
        for seed in 0..100 {
            let g = planted_partition(1, 20, 0.3, 0.0, seed);
            total += g.edge_count();
        }
        let mean = total as f64 / 100.0;
        assert!((mean - 57.0).abs() < 4.0 * 0.632, "mean {mean}");
    }

    #[test]
    fn pure_insertion_stream() {
        let src = planted_partition(2, 5, 1.0, 0.0, 1);
        let ev = gen_stream(&src, 0.0, 3, GapDeletion::OneCoin).unwrap();
        let arrivals = arrival_phase_len(&ev);
        assert_eq!(arrivals, 10);
        assert_eq!(ev.len(), 10);
        assert!(ev.iter().all(StreamEvent::is_insert));
        let inserted_edges: usize = ev
            .iter()
            .map(|e| match e {
                StreamEvent::Insert { edges, .. } => edges.len(),
                _ => 0,
            })
            .sum();
        assert_eq!(inserted_edges, src.edge_count());
    }

    #[test]
    fn generated_streams_replay() {
        for seed in 0..50 {
            let src = planted_partition(3, 8, 0.7, 0.1, seed);
            for gap in [GapDeletion::OneCoin, GapDeletion::Geometric] {
                let ev = gen_stream(&src, 0.4, seed, gap).unwrap();
                let mut g = DynamicGraph::new();
                for e in &ev {
                    match e {
                        StreamEvent::Insert { node, edges } => g.insert_node(*node, edges).unwrap(),
                        StreamEvent::Delete { node } => {
                            g.delete_node(*node).unwrap();
                        }
                    }
                }
                assert_eq!(g.node_count(), 0);
            }
        }
    }

    #[test]
    fn determinism_and_format_roundtrip() {
        let src = planted_partition(2, 10, 0.8, 0.1, 5);
        let a = gen_stream(&src, 0.2, 9, GapDeletion::OneCoin).unwrap();
        let b = gen_stream(&src, 0.2, 9, GapDeletion::OneCoin).unwrap();
        assert_eq!(format_stream(&a), format_stream(&b));
        assert_eq!(parse_stream(&format_stream(&a), "t").unwrap(), a);
        assert!(parse_stream("X 1\n", "t").is_err());
        assert!(parse_stream("D 1 2\n", "t").is_err());
        assert!(gen_stream(&src, 1.0, 0, GapDeletion::OneCoin).is_err());
    }

    #[test]
    fn geometric_gap_mean() {
        // Heads before the first tail: mean p / (1 - p) = 0.25 for p = 0.2,
        // variance p / (1 - p)^2 = 0.3125. 2000 seeds × 100 gaps gives an sd
        // of ~0.0013 for the pooled mean. Early gaps are truncated when the
        // graph empties, which biases the mean down by well under 0.005.
        let p = 0.2;
        let src = SourceGraph::from_pairs(101, []);
        let mut deletions = 0usize;
        for seed in 0..2_000 {
            let ev = gen_stream(&src, p, seed, GapDeletion::Geometric).unwrap();
            let end = arrival_phase_len(&ev);
            deletions += ev[..end].iter().filter(|e| !e.is_insert()).count();
        }
        let mean = deletions as f64 / (2_000.0 * 100.0);
        assert!((mean - p / (1.0 - p)).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn one_coin_gap_mean() {
        let src = SourceGraph::from_pairs(51, []);
        let mut dels = 0usize;
        for seed in 0..2_000 {
            let ev = gen_stream(&src, 0.2, seed, GapDeletion::OneCoin).unwrap();
            dels += ev[..arrival_phase_len(&ev)].iter().filter(|e| !e.is_insert()).count();
        }
        let mean = dels as f64 / (2_000.0 * 50.0);
        assert!((mean - 0.2).abs() < 0.01, "mean {mean}");
    }
}
