//! Stream clustering algorithms behind one trait, looked up by name.

use rand::SeedableRng;

use crate::baselines::{pivot, singletons, static_agreement, DynamicPivot};
use crate::dcc::{DccConfig, DynamicAgreement};
use crate::error::{Error, Result};
use crate::extraction::ClusterLabels;
use crate::graph_store::DynamicGraph;
use crate::probes::Convention;
use crate::stream::StreamEvent;
use crate::SimRng;

/// Cumulative work counters. Fields an algorithm does not track stay zero.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct AlgCounters {
    pub agreement_calls: u64,
    pub heavy_calls: u64,
    pub notifications: [u64; 3],
    pub anchors: u64,
    pub sparse_edges: u64,
    pub touched: u64,
}

impl AlgCounters {
    pub fn probe_calls(&self) -> u64 {
        self.agreement_calls + self.heavy_calls
    }
}

pub trait StreamClusterer {
    fn name(&self) -> &'static str;
    fn observe(&mut self, event: &StreamEvent) -> Result<()>;
    fn graph(&self) -> &DynamicGraph;
    /// Clustering of the current graph. May be computed on demand.
    fn labels(&mut self) -> ClusterLabels;
    fn counters(&self) -> AlgCounters;
}

type Factory = fn(&DccConfig) -> Box<dyn StreamClusterer>;

/// Name -> constructor. All constructors take the run's [`DccConfig`]; the
/// baselines only read its epsilon and seed.
pub struct Registry {
    entries: Vec<(&'static str, Factory)>,
}

impl Default for Registry {
    fn default() -> Self {
        let mut r = Self { entries: Vec::new() };
        r.register("da", |c| Box::new(Da(DynamicAgreement::new(c.clone()))));
        r.register("pivot-dyn", |c| Box::new(PivotDyn::new(c.seed)));
        r.register("singletons", |_| Box::new(Recompute::new("singletons", |g, _| singletons(g), 0)));
        r.register("agree-static", |c| {
            let eps = c.epsilon();
            Box::new(Recompute::new("agree-static", move |g, _| static_agreement(g, eps, Convention::Closed), 0))
        });
        r.register("pivot", |c| Box::new(Recompute::new("pivot", pivot, c.seed)));
        r
    }
}

impl Registry {
    /// Replaces an existing entry of the same name.
    pub fn register(&mut self, name: &'static str, factory: Factory) {
        self.entries.retain(|e| e.0 != name);
        self.entries.push((name, factory));
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|e| e.0).collect()
    }

    pub fn build(&self, name: &str, cfg: &DccConfig) -> Result<Box<dyn StreamClusterer>> {
        let (_, f) = self
            .entries
            .iter()
            .find(|e| e.0 == name)
            .ok_or_else(|| Error::UnknownAlgorithm(name.to_string()))?;
        Ok(f(cfg))
    }

    /// Builds a comma-separated list, in the given order.
    pub fn build_list(&self, names: &str, cfg: &DccConfig) -> Result<Vec<Box<dyn StreamClusterer>>> {
        names.split(',').map(str::trim).filter(|s| !s.is_empty()).map(|n| self.build(n, cfg)).collect()
    }
}

struct Da(DynamicAgreement);

impl StreamClusterer for Da {
    fn name(&self) -> &'static str {
        "da"
    }

    fn observe(&mut self, event: &StreamEvent) -> Result<()> {
        self.0.process_event(event)?;
        Ok(())
    }

    fn graph(&self) -> &DynamicGraph {
        self.0.graph()
    }

    fn labels(&mut self) -> ClusterLabels {
        self.0.labels()
    }

    fn counters(&self) -> AlgCounters {
        let p = self.0.probe_counters();
        AlgCounters {
            agreement_calls: p.agreement_calls,
            heavy_calls: p.heavy_calls,
            notifications: self.0.notify_state().counters.sent,
            anchors: self.0.solution().anchor_count() as u64,
            sparse_edges: self.0.solution().edge_count() as u64,
            touched: 0,
        }
    }
}

struct PivotDyn {
    inner: DynamicPivot,
    rng: SimRng,
}

impl PivotDyn {
    fn new(seed: u64) -> Self {
        Self { inner: DynamicPivot::new(), rng: SimRng::seed_from_u64(seed) }
    }
}

impl StreamClusterer for PivotDyn {
    fn name(&self) -> &'static str {
        "pivot-dyn"
    }

    fn observe(&mut self, event: &StreamEvent) -> Result<()> {
        self.inner.observe(event, &mut self.rng)?;
        Ok(())
    }

    fn graph(&self) -> &DynamicGraph {
        self.inner.graph()
    }

    fn labels(&mut self) -> ClusterLabels {
        self.inner.labels()
    }

    fn counters(&self) -> AlgCounters {
        AlgCounters { touched: self.inner.counters().touched, ..Default::default() }
    }
}

/// Tracks the graph and reclusters from scratch whenever labels are asked for.
struct Recompute<F> {
    name: &'static str,
    graph: DynamicGraph,
    cluster: F,
    rng: SimRng,
}

impl<F: FnMut(&DynamicGraph, &mut SimRng) -> ClusterLabels> Recompute<F> {
    fn new(name: &'static str, cluster: F, seed: u64) -> Self {
        Self { name, graph: DynamicGraph::new(), cluster, rng: SimRng::seed_from_u64(seed) }
    }
}

impl<F: FnMut(&DynamicGraph, &mut SimRng) -> ClusterLabels> StreamClusterer for Recompute<F> {
    fn name(&self) -> &'static str {
        self.name
    }

    fn observe(&mut self, event: &StreamEvent) -> Result<()> {
        match event {
            StreamEvent::Insert { node, edges } => self.graph.insert_node(*node, edges)?,
            StreamEvent::Delete { node } => {
                self.graph.delete_node(*node)?;
            }
        }
        Ok(())
    }

    fn graph(&self) -> &DynamicGraph {
        &self.graph
    }

    fn labels(&mut self) -> ClusterLabels {
        (self.cluster)(&self.graph, &mut self.rng)
    }

    fn counters(&self) -> AlgCounters {
        AlgCounters::default()
    }
}
