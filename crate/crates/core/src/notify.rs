//! Notification propagation for arrivals and deletions.
//!
//! Every node `u` keeps, per degree level `i = ⌊log2 d⌋`, its last neighbor
//! sample `I^i_u` and the backpointer set `B^i_u = { w : u ∈ I^i_w }`. An
//! arrival notifies the arriving node's fresh sample; a deletion notifies
//! everyone who had sampled the deleted node. Recipients resample and forward
//! for two more hops (Type 0 -> Type 1 -> Type 2).

use std::collections::BTreeSet;

use rand::Rng;
use rustc_hash::FxHashMap;

use crate::error::GraphError;
use crate::graph_store::{DynamicGraph, NeighborSet, NodeId};
use crate::stream::StreamEvent;

/// `⌊log2 d⌋` for `d ≥ 1`.
pub fn level(degree: usize) -> usize {
    debug_assert!(degree > 0);
    (usize::BITS - 1 - degree.leading_zeros()) as usize
}

#[derive(Clone, Debug, PartialEq)]
pub struct NotifyConfig {
    /// Draws per resample.
    pub sample_size: usize,
    /// Draw `min(sample_size, degree)` instead of `sample_size` (theory mode).
    pub cap_at_degree: bool,
    /// Keep samples taken at other degree levels (and their backpointers)
    /// when resampling; otherwise only the active level is ever nonempty.
    pub retain_levels: bool,
}

impl NotifyConfig {
    pub fn practical(sample_size: usize) -> Self {
        Self { sample_size, cap_at_degree: false, retain_levels: true }
    }

    /// `⌈10^10 · scale · ln n / eps⌉` draws, capped at the degree.
    pub fn theory(epsilon: f64, n: usize, scale: f64) -> Self {
        let s = crate::probes::log_sample_count(1e10 * scale, n, epsilon);
        Self { sample_size: s, cap_at_degree: true, retain_levels: true }
    }

    fn draws(&self, degree: usize) -> usize {
        if self.cap_at_degree {
            self.sample_size.min(degree)
        } else {
            self.sample_size
        }
    }
}

#[derive(Clone, Debug, Default)]
struct NodeSlots {
    /// `I^i_u`, sorted and duplicate-free.
    samples: Vec<Vec<NodeId>>,
    /// `B^i_u`.
    back: Vec<NeighborSet>,
}

impl NodeSlots {
    fn samples_mut(&mut self, lvl: usize) -> &mut Vec<NodeId> {
        if self.samples.len() <= lvl {
            self.samples.resize_with(lvl + 1, Vec::new);
        }
        &mut self.samples[lvl]
    }

    fn back_mut(&mut self, lvl: usize) -> &mut NeighborSet {
        if self.back.len() <= lvl {
            self.back.resize_with(lvl + 1, NeighborSet::new);
        }
        &mut self.back[lvl]
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct NotifyCounters {
    /// Messages sent, by type.
    pub sent: [u64; 3],
    pub resamples: u64,
}

impl NotifyCounters {
    pub fn total_sent(&self) -> u64 {
        self.sent.iter().sum()
    }
}

/// Outcome of one stream event.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NotificationBatch {
    /// Every message in send order: `(target, type)`.
    pub messages: Vec<(NodeId, u8)>,
    /// The arrived node plus every Type 0 / Type 1 recipient, sorted.
    pub interesting: Vec<NodeId>,
}

impl NotificationBatch {
    pub fn count_of(&self, ty: u8) -> usize {
        self.messages.iter().filter(|m| m.1 == ty).count()
    }
}

#[derive(Clone, Debug)]
pub struct NotifyState {
    cfg: NotifyConfig,
    nodes: FxHashMap<NodeId, NodeSlots>,
    pub counters: NotifyCounters,
}

impl NotifyState {
    pub fn new(cfg: NotifyConfig) -> Self {
        Self { cfg, nodes: FxHashMap::default(), counters: NotifyCounters::default() }
    }

    pub fn config(&self) -> &NotifyConfig {
        &self.cfg
    }

    /// Current sample of `u` at level `lvl`.
    pub fn sample_set(&self, u: NodeId, lvl: usize) -> &[NodeId] {
        self.nodes
            .get(&u)
            .and_then(|s| s.samples.get(lvl))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Sample at `u`'s current degree level.
    pub fn active_sample(&self, u: NodeId, g: &DynamicGraph) -> &[NodeId] {
        match g.degree(u) {
            Ok(d) if d > 0 => self.sample_set(u, level(d)),
            _ => &[],
        }
    }

    pub fn backpointers(&self, u: NodeId, lvl: usize) -> Vec<NodeId> {
        self.nodes
            .get(&u)
            .and_then(|s| s.back.get(lvl))
            .map(|b| b.as_slice().to_vec())
            .unwrap_or_default()
    }

    fn unlink(&mut self, w: NodeId, lvl: usize) {
        let old = match self.nodes.get_mut(&w).and_then(|s| s.samples.get_mut(lvl)) {
            Some(v) => std::mem::take(v),
            None => return,
        };
        for v in old {
            if let Some(slots) = self.nodes.get_mut(&v) {
                if let Some(b) = slots.back.get_mut(lvl) {
                    b.remove(w);
                }
            }
        }
    }

    /// Replaces `u`'s sample at its current level with fresh draws.
    pub fn resample<R: Rng + ?Sized>(&mut self, u: NodeId, g: &DynamicGraph, rng: &mut R) -> Result<(), GraphError> {
        let d = g.degree(u)?;
        self.counters.resamples += 1;
        self.nodes.entry(u).or_default();
        if d == 0 {
            // Samples are purged eagerly on deletion, so a degree-0 node has
            // nothing left in any I-set; clear anyway.
            let levels = self.nodes[&u].samples.len();
            for lvl in 0..levels {
                self.unlink(u, lvl);
            }
            return Ok(());
        }
        let lvl = level(d);
        if self.cfg.retain_levels {
            self.unlink(u, lvl);
        } else {
            let levels = self.nodes[&u].samples.len();
            for l in 0..levels {
                self.unlink(u, l);
            }
        }
        let nb = g.neighbor_set(u)?;
        let mut fresh: Vec<NodeId> = (0..self.cfg.draws(d))
            .map(|_| nb.sample(rng).expect("degree > 0"))
            .collect();
        fresh.sort_unstable();
        fresh.dedup();
        for &v in &fresh {
            self.nodes.entry(v).or_default().back_mut(lvl).insert(u);
        }
        *self.nodes.get_mut(&u).expect("inserted above").samples_mut(lvl) = fresh;
        Ok(())
    }

    /// Applies `event` to `g` and runs the full propagation.
    pub fn on_event<R: Rng + ?Sized>(
        &mut self,
        event: &StreamEvent,
        g: &mut DynamicGraph,
        rng: &mut R,
    ) -> Result<NotificationBatch, GraphError> {
        let mut batch = NotificationBatch::default();
        let mut interesting = BTreeSet::new();
        let mut round: BTreeSet<NodeId> = BTreeSet::new();
        match event {
            StreamEvent::Insert { node, edges } => {
                g.insert_node(*node, edges)?;
                self.nodes.insert(*node, NodeSlots::default());
                interesting.insert(*node);
                if !edges.is_empty() {
                    self.resample(*node, g, rng)?;
                    for &v in self.active_sample(*node, g) {
                        batch.messages.push((v, 0));
                        round.insert(v);
                    }
                }
            }
            StreamEvent::Delete { node } => {
                let u = *node;
                if !g.contains(u) {
                    return Err(GraphError::UnknownNode(u));
                }
                let slots = self.nodes.remove(&u).unwrap_or_default();
                for (lvl, b) in slots.back.iter().enumerate() {
                    for w in b.iter() {
                        round.insert(w);
                        if let Some(ws) = self.nodes.get_mut(&w).and_then(|s| s.samples.get_mut(lvl)) {
                            ws.retain(|&x| x != u);
                        }
                    }
                }
                for (lvl, sample) in slots.samples.iter().enumerate() {
                    for v in sample {
                        if let Some(b) = self.nodes.get_mut(v).and_then(|s| s.back.get_mut(lvl)) {
                            b.remove(u);
                        }
                    }
                }
                for &w in &round {
                    batch.messages.push((w, 0));
                }
                g.delete_node(u)?;
            }
        }
        self.counters.sent[0] += round.len() as u64;

        for ty in 0u8..3 {
            let mut next = BTreeSet::new();
            for &w in &round {
                self.resample(w, g, rng)?;
                if ty < 2 {
                    interesting.insert(w);
                    let before = batch.messages.len();
                    for &v in self.active_sample(w, g) {
                        batch.messages.push((v, ty + 1));
                        next.insert(v);
                    }
                    self.counters.sent[ty as usize + 1] += (batch.messages.len() - before) as u64;
                }
            }
            round = next;
        }
        batch.interesting = interesting.into_iter().collect();
        Ok(batch)
    }

    /// Bidirectional consistency of sample and backpointer sets, and every
    /// sample drawn from the current neighborhood.
    pub fn check_invariants(&self, g: &DynamicGraph) -> Result<(), String> {
        for &u in g.nodes() {
            if !self.nodes.contains_key(&u) {
                return Err(format!("present node {u} has no notify state"));
            }
        }
        for (&u, slots) in &self.nodes {
            if !g.contains(u) {
                return Err(format!("absent node {u} still has notify state"));
            }
            for (lvl, sample) in slots.samples.iter().enumerate() {
                for &v in sample {
                    if !g.has_edge(u, v).unwrap_or(false) {
                        return Err(format!("{v} ∈ I^{lvl}_{u} but is not a neighbor"));
                    }
                    let back = self.nodes.get(&v).and_then(|s| s.back.get(lvl));
                    if !back.is_some_and(|b| b.contains(u)) {
                        return Err(format!("{v} ∈ I^{lvl}_{u} but {u} ∉ B^{lvl}_{v}"));
                    }
                }
            }
            if !self.cfg.retain_levels && slots.samples.iter().filter(|s| !s.is_empty()).count() > 1 {
                return Err(format!("{u} holds samples at more than one level"));
            }
            for (lvl, back) in slots.back.iter().enumerate() {
                for w in back.iter() {
                    let ok = self.nodes.get(&w).and_then(|s| s.samples.get(lvl)).is_some_and(|s| s.contains(&u));
                    if !ok {
                        return Err(format!("{w} ∈ B^{lvl}_{u} but {u} ∉ I^{lvl}_{w}"));
                    }
                }
            }
        }
        Ok(())
    }
}
