//! The dynamic agreement driver. After every stream event the notification
//! round yields a set of interesting nodes; each of them is cleaned, possibly
//! (re)anchored, and connected to nearby anchors. The sparse graph `G̃`
//! maintained this way has every edge incident to an anchor, and its
//! connected components are the clustering.

use rand::Rng;
use rustc_hash::FxHashMap;

use crate::error::GraphError;
use crate::graph_store::{DynamicGraph, NeighborSet, NodeId};
use crate::notify::{NotificationBatch, NotifyConfig, NotifyState};
use crate::probes::{log_sample_count, ProbeConfig, ProbeCounters, ProbeMode, ProbeStrategy, Prober};
use crate::stream::StreamEvent;
use crate::{rng_from_seed, SimRng};

#[derive(Clone, Debug, PartialEq)]
pub struct DccConfig {
    pub probe: ProbeConfig,
    pub strategy: ProbeStrategy,
    /// Anchor probability is `min(anchor_numerator / degree, 1)`.
    pub anchor_numerator: f64,
    pub connect_samples: usize,
    /// Draw `min(connect_samples, degree)` neighbors in Connect.
    pub connect_cap_at_degree: bool,
    pub notify: NotifyConfig,
    /// Apply anchor-set joins/leaves after the whole interesting set has been
    /// processed instead of after each node.
    pub deferred_phi: bool,
    pub seed: u64,
}

impl DccConfig {
    /// Sample size 2 everywhere, anchor probability `20 / d`.
    pub fn practical(epsilon: f64, seed: u64) -> Self {
        Self {
            probe: ProbeConfig::practical(epsilon),
            strategy: ProbeStrategy::Probabilistic,
            anchor_numerator: 20.0,
            connect_samples: 2,
            connect_cap_at_degree: false,
            notify: NotifyConfig::practical(2),
            deferred_phi: false,
            seed,
        }
    }

    /// Theory constants for a stream over `n` nodes. `scale` multiplies the
    /// anchor, connect and notify constants (`10^7`, `10^5`, `10^10`); the
    /// probe constants are used as is.
    pub fn theory(epsilon: f64, n: usize, scale: f64, seed: u64) -> Self {
        let ln_n = (n.max(2) as f64).ln();
        Self {
            probe: ProbeConfig::theory(epsilon, n),
            strategy: ProbeStrategy::Probabilistic,
            anchor_numerator: 1e7 * scale * ln_n / epsilon,
            connect_samples: log_sample_count(1e5 * scale, n, epsilon),
            connect_cap_at_degree: true,
            notify: NotifyConfig::theory(epsilon, n, scale),
            deferred_phi: false,
            seed,
        }
    }

    pub fn epsilon(&self) -> f64 {
        self.probe.epsilon
    }

    pub fn mode(&self) -> ProbeMode {
        self.probe.mode
    }

    pub fn validate(&self) -> Result<(), String> {
        self.probe.validate()?;
        if self.anchor_numerator.is_nan() || self.anchor_numerator <= 0.0 {
            return Err("anchor numerator must be positive".into());
        }
        if self.connect_samples == 0 || self.notify.sample_size == 0 {
            return Err("sample sizes must be positive".into());
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AnchorRecord {
    /// `G̃`-degree when the node (last) entered the anchor set.
    pub entry_degree: usize,
    /// Edges removed by Clean since then.
    pub losses: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SolutionCounters {
    pub edges_added: u64,
    pub edges_removed: u64,
    pub anchor_joins: u64,
    pub anchor_leaves: u64,
}

/// The sparse graph `G̃`, the anchor set `Φ`, and `Φ_u` for every node.
#[derive(Clone, Debug, Default)]
pub struct SparseSolution {
    adj: FxHashMap<NodeId, NeighborSet>,
    anchors: FxHashMap<NodeId, AnchorRecord>,
    phi: FxHashMap<NodeId, NeighborSet>,
    edge_count: usize,
    pub counters: SolutionCounters,
}

static EMPTY: &[NodeId] = &[];

impl SparseSolution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn anchor_count(&self) -> usize {
        self.anchors.len()
    }

    pub fn is_anchor(&self, u: NodeId) -> bool {
        self.anchors.contains_key(&u)
    }

    pub fn anchor_record(&self, u: NodeId) -> Option<AnchorRecord> {
        self.anchors.get(&u).copied()
    }

    pub fn sorted_anchors(&self) -> Vec<NodeId> {
        let mut a: Vec<NodeId> = self.anchors.keys().copied().collect();
        a.sort_unstable();
        a
    }

    pub fn neighbors(&self, u: NodeId) -> &[NodeId] {
        self.adj.get(&u).map_or(EMPTY, NeighborSet::as_slice)
    }

    pub fn degree(&self, u: NodeId) -> usize {
        self.adj.get(&u).map_or(0, NeighborSet::len)
    }

    /// `Φ_u`: anchors adjacent to `u` in `G̃`.
    pub fn phi_of(&self, u: NodeId) -> &[NodeId] {
        self.phi.get(&u).map_or(EMPTY, NeighborSet::as_slice)
    }

    pub fn has_edge(&self, a: NodeId, b: NodeId) -> bool {
        self.adj.get(&a).is_some_and(|s| s.contains(b))
    }

    /// Every edge once as `(min, max)`, sorted.
    pub fn edges(&self) -> Vec<(NodeId, NodeId)> {
        let mut e: Vec<_> = self
            .adj
            .iter()
            .flat_map(|(&a, s)| s.iter().filter(move |&b| a < b).map(move |b| (a, b)))
            .collect();
        e.sort_unstable();
        e
    }

    pub fn add_edge(&mut self, a: NodeId, b: NodeId) -> bool {
        if a == b || !self.adj.entry(a).or_default().insert(b) {
            return false;
        }
        self.adj.entry(b).or_default().insert(a);
        if self.is_anchor(a) {
            self.phi.entry(b).or_default().insert(a);
        }
        if self.is_anchor(b) {
            self.phi.entry(a).or_default().insert(b);
        }
        self.edge_count += 1;
        self.counters.edges_added += 1;
        true
    }

    pub fn remove_edge(&mut self, a: NodeId, b: NodeId) -> bool {
        if !self.adj.get_mut(&a).is_some_and(|s| s.remove(b)) {
            return false;
        }
        self.adj.get_mut(&b).expect("symmetric").remove(a);
        if let Some(p) = self.phi.get_mut(&a) {
            p.remove(b);
        }
        if let Some(p) = self.phi.get_mut(&b) {
            p.remove(a);
        }
        self.edge_count -= 1;
        self.counters.edges_removed += 1;
        true
    }

    /// Enters `u` into `Φ` (or refreshes its record if already there).
    pub fn set_anchor(&mut self, u: NodeId) {
        let rec = AnchorRecord { entry_degree: self.degree(u), losses: 0 };
        if self.anchors.insert(u, rec).is_none() {
            self.counters.anchor_joins += 1;
            for &v in self.adj.get(&u).map_or(EMPTY, NeighborSet::as_slice) {
                self.phi.entry(v).or_default().insert(u);
            }
        }
    }

    /// Drops `u` from `Φ` and removes its edges to non-anchors, which would
    /// otherwise have no anchor endpoint.
    pub fn demote(&mut self, u: NodeId) {
        if self.anchors.remove(&u).is_none() {
            return;
        }
        self.counters.anchor_leaves += 1;
        for v in self.neighbors(u).to_vec() {
            if let Some(p) = self.phi.get_mut(&v) {
                p.remove(u);
            }
            if !self.is_anchor(v) {
                self.remove_edge(u, v);
            }
        }
    }

    /// Drops `u` from `Φ` together with all of its edges.
    pub fn evict(&mut self, u: NodeId) {
        self.demote(u);
        for v in self.neighbors(u).to_vec() {
            self.remove_edge(u, v);
        }
    }

    pub fn remove_edges_to_non_anchors(&mut self, u: NodeId) {
        for v in self.neighbors(u).to_vec() {
            if !self.is_anchor(v) {
                self.remove_edge(u, v);
            }
        }
    }

    pub fn remove_node(&mut self, u: NodeId) {
        self.evict(u);
        self.adj.remove(&u);
        self.phi.remove(&u);
    }

    fn record_loss(&mut self, w: NodeId) -> Option<AnchorRecord> {
        let rec = self.anchors.get_mut(&w)?;
        rec.losses += 1;
        Some(*rec)
    }

    /// `Ẽ ⊆ E`, the anchor-endpoint rule, no absent nodes, and `Φ_u` equal to
    /// the anchor-restricted `G̃` adjacency.
    pub fn check_invariants(&self, g: &DynamicGraph) -> Result<(), String> {
        let mut deg_sum = 0;
        for (&a, set) in &self.adj {
            if !g.contains(a) {
                return Err(format!("absent node {a} has sparse adjacency"));
            }
            for b in set.iter() {
                if !g.has_edge(a, b).unwrap_or(false) {
                    return Err(format!("sparse edge {a}-{b} is not in G"));
                }
                if !self.adj.get(&b).is_some_and(|s| s.contains(a)) {
                    return Err(format!("sparse edge {a}-{b} not symmetric"));
                }
                if !self.is_anchor(a) && !self.is_anchor(b) {
                    return Err(format!("sparse edge {a}-{b} has no anchor endpoint"));
                }
            }
            deg_sum += set.len();
            let expect: Vec<NodeId> = set.iter().filter(|&b| self.is_anchor(b)).collect();
            let got = self.phi_of(a);
            if expect.len() != got.len() || expect.iter().any(|x| !got.contains(x)) {
                return Err(format!("Φ_{a} out of sync with sparse adjacency"));
            }
        }
        for (&a, p) in &self.phi {
            if !p.is_empty() && !self.adj.contains_key(&a) {
                return Err(format!("Φ_{a} nonempty without sparse adjacency"));
            }
        }
        if deg_sum != 2 * self.edge_count {
            return Err("sparse edge count out of sync".into());
        }
        for &a in self.anchors.keys() {
            if !g.contains(a) {
                return Err(format!("absent node {a} is an anchor"));
            }
        }
        Ok(())
    }
}

/// Counter deltas for one event.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StepReport {
    pub interesting: usize,
    pub agreement_calls: u64,
    pub heavy_calls: u64,
    pub notifications: u64,
    pub anchors_joined: u64,
    pub anchors_left: u64,
    pub edges_added: u64,
    pub edges_removed: u64,
}

impl StepReport {
    pub fn probe_calls(&self) -> u64 {
        self.agreement_calls + self.heavy_calls
    }
}

enum PhiChange {
    Join(NodeId),
    Leave(NodeId),
}

/// Owns everything one stream run needs: graph, notify state, sparse
/// solution, probes and the single random generator.
#[derive(Clone, Debug)]
pub struct DynamicAgreement {
    cfg: DccConfig,
    graph: DynamicGraph,
    notify: NotifyState,
    sol: SparseSolution,
    prober: Prober,
    rng: SimRng,
    last_batch: NotificationBatch,
}

impl DynamicAgreement {
    pub fn new(cfg: DccConfig) -> Self {
        let notify = NotifyState::new(cfg.notify.clone());
        let prober = Prober::new(cfg.probe.clone(), cfg.strategy);
        let rng = rng_from_seed(cfg.seed);
        Self {
            cfg,
            graph: DynamicGraph::new(),
            notify,
            sol: SparseSolution::new(),
            prober,
            rng,
            last_batch: NotificationBatch::default(),
        }
    }

    pub fn config(&self) -> &DccConfig {
        &self.cfg
    }

    pub fn graph(&self) -> &DynamicGraph {
        &self.graph
    }

    pub fn solution(&self) -> &SparseSolution {
        &self.sol
    }

    pub fn notify_state(&self) -> &NotifyState {
        &self.notify
    }

    pub fn probe_counters(&self) -> ProbeCounters {
        self.prober.counters
    }

    pub fn last_batch(&self) -> &NotificationBatch {
        &self.last_batch
    }

    pub fn process_event(&mut self, event: &StreamEvent) -> Result<StepReport, GraphError> {
        let probes_before = self.prober.counters;
        let sol_before = self.sol.counters;
        let sent_before = self.notify.counters.total_sent();

        let batch = self.notify.on_event(event, &mut self.graph, &mut self.rng)?;
        if let StreamEvent::Delete { node } = event {
            self.sol.remove_node(*node);
        }

        let mut pending = Vec::new();
        for &u in &batch.interesting {
            if !self.graph.contains(u) {
                continue;
            }
            self.clean(u)?;
            let change = self.anchor(u)?;
            self.connect(u)?;
            match change {
                Some(c) if self.cfg.deferred_phi => pending.push(c),
                Some(c) => self.apply(c),
                None => {}
            }
        }
        for c in pending.iter().filter(|c| matches!(c, PhiChange::Join(_))) {
            self.apply_ref(c);
        }
        for c in pending.iter().filter(|c| matches!(c, PhiChange::Leave(_))) {
            self.apply_ref(c);
        }

        let p = self.prober.counters;
        let s = self.sol.counters;
        let report = StepReport {
            interesting: batch.interesting.len(),
            agreement_calls: p.agreement_calls - probes_before.agreement_calls,
            heavy_calls: p.heavy_calls - probes_before.heavy_calls,
            notifications: self.notify.counters.total_sent() - sent_before,
            anchors_joined: s.anchor_joins - sol_before.anchor_joins,
            anchors_left: s.anchor_leaves - sol_before.anchor_leaves,
            edges_added: s.edges_added - sol_before.edges_added,
            edges_removed: s.edges_removed - sol_before.edges_removed,
        };
        self.last_batch = batch;
        Ok(report)
    }

    fn apply(&mut self, c: PhiChange) {
        self.apply_ref(&c);
    }

    fn apply_ref(&mut self, c: &PhiChange) {
        match *c {
            PhiChange::Join(u) => {
                if self.graph.contains(u) {
                    self.sol.set_anchor(u);
                }
            }
            PhiChange::Leave(u) => self.sol.demote(u),
        }
    }

    /// Drops sparse edges to anchors that no longer agree with `u` or are no
    /// longer heavy, and evicts anchors that lost more than an eps fraction of
    /// their entry degree.
    pub fn clean(&mut self, u: NodeId) -> Result<(), GraphError> {
        let eps = self.cfg.epsilon();
        for w in self.sol.phi_of(u).to_vec() {
            if !self.sol.is_anchor(w) {
                continue;
            }
            if self.sol.has_edge(w, u) {
                let keep = self.prober.agree(&self.graph, w, u, &mut self.rng)?
                    && self.prober.heavy(&self.graph, w, &mut self.rng)?;
                if !keep {
                    self.sol.remove_edge(w, u);
                    self.sol.record_loss(w);
                }
            }
            if let Some(rec) = self.sol.anchor_record(w) {
                if rec.losses as f64 > eps * rec.entry_degree as f64 {
                    self.sol.evict(w);
                }
            }
        }
        Ok(())
    }

    /// Anchor coin flip and, for heavy nodes that win it, edges to every
    /// agreeing neighbor. Returns the anchor-set change to apply once `u`'s
    /// processing ends.
    fn anchor(&mut self, u: NodeId) -> Result<Option<PhiChange>, GraphError> {
        let d = self.graph.degree(u)?;
        if d == 0 {
            return Ok(None);
        }
        let p = (self.cfg.anchor_numerator / d as f64).min(1.0);
        let x = self.rng.random_bool(p);
        let was_anchor = self.sol.is_anchor(u);
        if was_anchor {
            self.sol.remove_edges_to_non_anchors(u);
        }
        if x && self.prober.heavy(&self.graph, u, &mut self.rng)? {
            for v in self.graph.neighbors(u)?.to_vec() {
                if self.prober.agree(&self.graph, u, v, &mut self.rng)? {
                    self.sol.add_edge(u, v);
                }
            }
        }
        Ok(if x {
            Some(PhiChange::Join(u))
        } else if was_anchor {
            Some(PhiChange::Leave(u))
        } else {
            None
        })
    }

    /// Links `u` to heavy, agreeing anchors found through a few random
    /// neighbors.
    fn connect(&mut self, u: NodeId) -> Result<(), GraphError> {
        let d = self.graph.degree(u)?;
        if d == 0 {
            return Ok(());
        }
        let draws = if self.cfg.connect_cap_at_degree {
            self.cfg.connect_samples.min(d)
        } else {
            self.cfg.connect_samples
        };
        for _ in 0..draws {
            let w = self.graph.sample_neighbor(u, &mut self.rng)?;
            for r in self.sol.phi_of(w).to_vec() {
                if r == u || self.sol.has_edge(u, r) || !self.graph.has_edge(u, r)? {
                    continue;
                }
                if self.prober.heavy(&self.graph, r, &mut self.rng)?
                    && self.prober.agree(&self.graph, r, u, &mut self.rng)?
                {
                    self.sol.add_edge(u, r);
                }
            }
        }
        Ok(())
    }

    pub fn check_invariants(&self) -> Result<(), String> {
        self.graph.check_invariants()?;
        self.notify.check_invariants(&self.graph)?;
        self.sol.check_invariants(&self.graph)
    }

    pub fn labels(&self) -> crate::extraction::ClusterLabels {
        crate::extraction::compute_components(&self.sol, self.graph.nodes()).labels
    }
}
