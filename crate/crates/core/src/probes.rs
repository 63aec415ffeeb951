//! Agreement and heaviness tests between nodes: exact versions straight from
//! the definitions, and sampled versions that only touch `O(log n / eps)`
//! neighborhood samples.
//!
//! Two nodes `u, v` are in eps-agreement when
//! `|N(u) △ N(v)| < eps * max(|N(u)|, |N(v)|)`; a node is eps-heavy when it is
//! in eps-agreement with more than a `(1 - eps)` fraction of its neighbors.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use rustc_hash::FxHashMap;

use crate::error::GraphError;
use crate::graph_store::{DynamicGraph, NodeId};

/// Whether a node counts as its own neighbor.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Convention {
    /// `N(u)`: neighbors only.
    Open,
    /// `N[u] = N(u) ∪ {u}`: clique members get identical neighborhoods.
    #[default]
    Closed,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ProbeMode {
    /// Sample sizes `⌈300 ln n / eps⌉` and `⌈1200 ln n / eps⌉`.
    Theory,
    /// A small fixed sample (2 by default) for every probe.
    #[default]
    Practical,
}

/// How a sampled probe obtains its miss counts.
///
/// `Sampled` issues one neighbor-sample query and two edge queries per draw.
/// `Enumerated` reads both neighborhoods once, computes the exact miss
/// probability and draws the miss count from `Binomial(k, p)`; the verdict
/// has the same distribution at `O(|N(u)| + |N(v)|)` cost instead of `O(k)`.
/// `Auto` enumerates whenever that is cheaper.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum EvalRoute {
    Sampled,
    Enumerated,
    #[default]
    Auto,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeConfig {
    pub epsilon: f64,
    pub mode: ProbeMode,
    pub theory_agree_samples: usize,
    pub theory_heavy_samples: usize,
    pub practical_samples: usize,
    pub convention: Convention,
    pub route: EvalRoute,
}

/// `⌈c · ln n / eps⌉`, at least 1.
pub fn log_sample_count(c: f64, n: usize, epsilon: f64) -> usize {
    let n = n.max(2) as f64;
    ((c * n.ln() / epsilon).ceil() as usize).max(1)
}

impl ProbeConfig {
    pub fn practical(epsilon: f64) -> Self {
        Self {
            epsilon,
            mode: ProbeMode::Practical,
            theory_agree_samples: 1,
            theory_heavy_samples: 1,
            practical_samples: 2,
            convention: Convention::Closed,
            route: EvalRoute::Auto,
        }
    }

    /// Theory-mode constants for a stream over `n` nodes.
    pub fn theory(epsilon: f64, n: usize) -> Self {
        Self {
            mode: ProbeMode::Theory,
            theory_agree_samples: log_sample_count(300.0, n, epsilon),
            theory_heavy_samples: log_sample_count(1200.0, n, epsilon),
            ..Self::practical(epsilon)
        }
    }

    pub fn with_convention(mut self, convention: Convention) -> Self {
        self.convention = convention;
        self
    }

    pub fn with_route(mut self, route: EvalRoute) -> Self {
        self.route = route;
        self
    }

    pub fn agree_samples(&self) -> usize {
        match self.mode {
            ProbeMode::Theory => self.theory_agree_samples,
            ProbeMode::Practical => self.practical_samples,
        }
    }

    pub fn heavy_samples(&self) -> usize {
        match self.mode {
            ProbeMode::Theory => self.theory_heavy_samples,
            ProbeMode::Practical => self.practical_samples,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(format!("epsilon must lie in (0, 1), got {}", self.epsilon));
        }
        if self.agree_samples() == 0 || self.heavy_samples() == 0 {
            return Err("sample counts must be positive".into());
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Answer {
    Yes,
    No,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbeVerdict {
    pub answer: Answer,
    /// Agreement: fraction of `u`-side draws outside `N(v)`.
    /// Heavy: fraction of inner agreement probes answering NO.
    pub stat_x: f64,
    /// Agreement: fraction of `v`-side draws outside `N(u)`. Heavy: 0.
    pub stat_y: f64,
}

impl ProbeVerdict {
    pub fn is_yes(&self) -> bool {
        self.answer == Answer::Yes
    }
}

/// Query and call accounting. Every counter is cumulative.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ProbeCounters {
    pub agreement_calls: u64,
    pub heavy_calls: u64,
    pub degree_queries: u64,
    pub edge_queries: u64,
    pub sample_queries: u64,
    /// Full-neighborhood reads (enumerated route and exact probes).
    pub neighborhood_reads: u64,
}

impl ProbeCounters {
    /// Agreement plus heavy calls, the per-update work measure used by the
    /// density benchmark.
    pub fn probe_calls(&self) -> u64 {
        self.agreement_calls + self.heavy_calls
    }

    pub fn queries(&self) -> u64 {
        self.degree_queries + self.edge_queries + self.sample_queries
    }
}

fn in_nbhd(g: &DynamicGraph, x: NodeId, v: NodeId, conv: Convention) -> Result<bool, GraphError> {
    if x == v {
        return Ok(conv == Convention::Closed);
    }
    g.has_edge(x, v)
}

fn nbhd_size(g: &DynamicGraph, u: NodeId, conv: Convention) -> Result<usize, GraphError> {
    let d = g.degree(u)?;
    Ok(match conv {
        Convention::Open => d,
        Convention::Closed => d + 1,
    })
}

fn sample_nbhd<R: Rng + ?Sized>(
    g: &DynamicGraph,
    u: NodeId,
    conv: Convention,
    rng: &mut R,
) -> Result<NodeId, GraphError> {
    let nb = g.neighbor_set(u)?;
    match conv {
        Convention::Open => nb.sample(rng).ok_or(GraphError::ZeroDegree(u)),
        Convention::Closed => {
            let i = rng.random_range(0..=nb.len());
            Ok(if i == nb.len() { u } else { nb.as_slice()[i] })
        }
    }
}

/// `|N(u) \ N(v)|` under the given convention.
fn one_sided_difference(g: &DynamicGraph, u: NodeId, v: NodeId, conv: Convention) -> Result<usize, GraphError> {
    let mut miss = 0;
    for &x in g.neighbors(u)? {
        if !in_nbhd(g, x, v, conv)? {
            miss += 1;
        }
    }
    if conv == Convention::Closed && !in_nbhd(g, u, v, conv)? {
        miss += 1;
    }
    Ok(miss)
}

/// `|N(u) △ N(v)|`.
pub fn symmetric_difference(g: &DynamicGraph, u: NodeId, v: NodeId, conv: Convention) -> Result<usize, GraphError> {
    Ok(one_sided_difference(g, u, v, conv)? + one_sided_difference(g, v, u, conv)?)
}

pub fn exact_agreement(
    g: &DynamicGraph,
    u: NodeId,
    v: NodeId,
    epsilon: f64,
    conv: Convention,
) -> Result<bool, GraphError> {
    let diff = symmetric_difference(g, u, v, conv)? as f64;
    let max = nbhd_size(g, u, conv)?.max(nbhd_size(g, v, conv)?) as f64;
    Ok(diff < epsilon * max)
}

pub fn exact_heavy(g: &DynamicGraph, u: NodeId, epsilon: f64, conv: Convention) -> Result<bool, GraphError> {
    let nbrs = g.neighbors(u)?;
    if nbrs.is_empty() {
        return Err(GraphError::ZeroDegree(u));
    }
    let mut agreeing = 0usize;
    for &v in nbrs {
        if exact_agreement(g, u, v, epsilon, conv)? {
            agreeing += 1;
        }
    }
    Ok(agreeing as f64 > (1.0 - epsilon) * nbrs.len() as f64)
}

fn agreement_threshold(cfg: &ProbeConfig) -> f64 {
    0.4 * cfg.epsilon
}

fn heavy_threshold(cfg: &ProbeConfig) -> f64 {
    1.2 * cfg.epsilon
}

/// Miss probabilities `(|N(u)\N(v)|/|N(u)|, |N(v)\N(u)|/|N(v)|)`.
fn miss_rates(
    g: &DynamicGraph,
    u: NodeId,
    v: NodeId,
    conv: Convention,
    counters: &mut ProbeCounters,
) -> Result<(f64, f64), GraphError> {
    let su = nbhd_size(g, u, conv)?;
    let sv = nbhd_size(g, v, conv)?;
    let mu = one_sided_difference(g, u, v, conv)?;
    let mv = one_sided_difference(g, v, u, conv)?;
    counters.degree_queries += 2;
    counters.neighborhood_reads += 2;
    counters.edge_queries += (su + sv) as u64;
    Ok((mu as f64 / su as f64, mv as f64 / sv as f64))
}

fn binomial_draw<R: Rng + ?Sized>(k: usize, p: f64, rng: &mut R) -> u64 {
    if p <= 0.0 {
        0
    } else if p >= 1.0 {
        k as u64
    } else {
        Binomial::new(k as u64, p).expect("p in (0,1)").sample(rng)
    }
}

fn agreement_verdict(cfg: &ProbeConfig, k: usize, misses_u: u64, misses_v: u64) -> ProbeVerdict {
    let stat_x = misses_u as f64 / k as f64;
    let stat_y = misses_v as f64 / k as f64;
    let t = agreement_threshold(cfg);
    let answer = if stat_x < t && stat_y < t { Answer::Yes } else { Answer::No };
    ProbeVerdict { answer, stat_x, stat_y }
}

fn check_probe_pre(g: &DynamicGraph, u: NodeId) -> Result<usize, GraphError> {
    let d = g.degree(u)?;
    if d == 0 {
        Err(GraphError::ZeroDegree(u))
    } else {
        Ok(d)
    }
}

fn use_enumeration(cfg: &ProbeConfig, k: usize, du: usize, dv: usize) -> bool {
    match cfg.route {
        EvalRoute::Sampled => false,
        EvalRoute::Enumerated => true,
        EvalRoute::Auto => k > du + dv + 2,
    }
}

/// Sampled agreement test. Draws `k` pairs `r_i ∈ N(u)`, `s_i ∈ N(v)` and
/// answers YES iff both miss fractions fall below `0.4 eps`.
pub fn probabilistic_agreement<R: Rng + ?Sized>(
    g: &DynamicGraph,
    u: NodeId,
    v: NodeId,
    cfg: &ProbeConfig,
    counters: &mut ProbeCounters,
    rng: &mut R,
) -> Result<ProbeVerdict, GraphError> {
    let du = check_probe_pre(g, u)?;
    let dv = check_probe_pre(g, v)?;
    counters.agreement_calls += 1;
    counters.degree_queries += 2;
    let k = cfg.agree_samples();
    let conv = cfg.convention;
    if use_enumeration(cfg, k, du, dv) {
        let (pu, pv) = miss_rates(g, u, v, conv, counters)?;
        let mu = binomial_draw(k, pu, rng);
        let mv = binomial_draw(k, pv, rng);
        return Ok(agreement_verdict(cfg, k, mu, mv));
    }
    let (mut mu, mut mv) = (0u64, 0u64);
    for _ in 0..k {
        let r = sample_nbhd(g, u, conv, rng)?;
        let s = sample_nbhd(g, v, conv, rng)?;
        counters.sample_queries += 2;
        // r ∈ N(u) \ N(v) and s ∈ N(v) \ N(u): two membership queries each.
        if in_nbhd(g, r, u, conv)? && !in_nbhd(g, r, v, conv)? {
            mu += 1;
        }
        if in_nbhd(g, s, v, conv)? && !in_nbhd(g, s, u, conv)? {
            mv += 1;
        }
        counters.edge_queries += 4;
    }
    Ok(agreement_verdict(cfg, k, mu, mv))
}

/// Sampled heaviness test. Draws `k` neighbors, runs the agreement probe
/// against each and answers YES iff the NO fraction is below `1.2 eps`.
pub fn heavy_probe<R: Rng + ?Sized>(
    g: &DynamicGraph,
    u: NodeId,
    cfg: &ProbeConfig,
    counters: &mut ProbeCounters,
    rng: &mut R,
) -> Result<ProbeVerdict, GraphError> {
    let du = check_probe_pre(g, u)?;
    counters.heavy_calls += 1;
    counters.degree_queries += 1;
    let k = cfg.heavy_samples();
    let k_inner = cfg.agree_samples();
    let conv = cfg.convention;
    let nbrs = g.neighbor_set(u)?;

    let mut no = 0u64;
    // Miss rates depend only on the (fixed) graph, so the enumerated route
    // computes them once per distinct neighbor; every draw stays fresh.
    let mut rates: FxHashMap<NodeId, (f64, f64)> = FxHashMap::default();
    for _ in 0..k {
        let v = nbrs.sample(rng).expect("degree checked");
        counters.sample_queries += 1;
        let dv = g.degree(v)?;
        let verdict = if use_enumeration(cfg, k_inner, du, dv) {
            counters.agreement_calls += 1;
            counters.degree_queries += 2;
            let (pu, pv) = match rates.get(&v) {
                Some(&r) => r,
                None => {
                    let r = miss_rates(g, u, v, conv, counters)?;
                    rates.insert(v, r);
                    r
                }
            };
            let mu = binomial_draw(k_inner, pu, rng);
            let mv = binomial_draw(k_inner, pv, rng);
            agreement_verdict(cfg, k_inner, mu, mv)
        } else {
            probabilistic_agreement(g, u, v, cfg, counters, rng)?
        };
        if !verdict.is_yes() {
            no += 1;
        }
    }
    let stat_x = no as f64 / k as f64;
    let answer = if stat_x < heavy_threshold(cfg) { Answer::Yes } else { Answer::No };
    Ok(ProbeVerdict { answer, stat_x, stat_y: 0.0 })
}

/// Which agreement/heaviness implementation the dynamic driver consults.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ProbeStrategy {
    #[default]
    Probabilistic,
    /// Exact definitions; for differential testing only.
    Exact,
}

/// Probe front end used by the dynamic algorithm: one config, one strategy,
/// one set of counters.
#[derive(Clone, Debug)]
pub struct Prober {
    pub cfg: ProbeConfig,
    pub strategy: ProbeStrategy,
    pub counters: ProbeCounters,
}

impl Prober {
    pub fn new(cfg: ProbeConfig, strategy: ProbeStrategy) -> Self {
        Self { cfg, strategy, counters: ProbeCounters::default() }
    }

    pub fn agree<R: Rng + ?Sized>(&mut self, g: &DynamicGraph, u: NodeId, v: NodeId, rng: &mut R) -> Result<bool, GraphError> {
        match self.strategy {
            ProbeStrategy::Probabilistic => {
                Ok(probabilistic_agreement(g, u, v, &self.cfg, &mut self.counters, rng)?.is_yes())
            }
            ProbeStrategy::Exact => {
                self.counters.agreement_calls += 1;
                self.counters.neighborhood_reads += 2;
                exact_agreement(g, u, v, self.cfg.epsilon, self.cfg.convention)
            }
        }
    }

    pub fn heavy<R: Rng + ?Sized>(&mut self, g: &DynamicGraph, u: NodeId, rng: &mut R) -> Result<bool, GraphError> {
        match self.strategy {
            ProbeStrategy::Probabilistic => Ok(heavy_probe(g, u, &self.cfg, &mut self.counters, rng)?.is_yes()),
            ProbeStrategy::Exact => {
                self.counters.heavy_calls += 1;
                self.counters.neighborhood_reads += 1;
                exact_heavy(g, u, self.cfg.epsilon, self.cfg.convention)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng_from_seed;

    fn n(i: u64) -> NodeId {
        NodeId(i)
    }

    fn graph(nodes: u64, edges: &[(u64, u64)]) -> DynamicGraph {
        let mut g = DynamicGraph::new();
        for i in 0..nodes {
            let nb: Vec<NodeId> = edges
                .iter()
                .filter_map(|&(a, b)| match (a, b) {
                    (a, b) if a == i && b < i => Some(n(b)),
                    (a, b) if b == i && a < i => Some(n(a)),
                    _ => None,
                })
                .collect();
            g.insert_node(n(i), &nb).unwrap();
        }
        g
    }

    fn clique_edges(ids: &[u64]) -> Vec<(u64, u64)> {
        let mut e = vec![];
        for (i, &a) in ids.iter().enumerate() {
            for &b in &ids[i + 1..] {
                e.push((a, b));
            }
        }
        e
    }

    #[test]
    fn sample_count_formula() {
        // ⌈300 · ln 1024 / 0.2⌉ = ⌈10397.2…⌉
        assert_eq!(log_sample_count(300.0, 1024, 0.2), 10398);
        assert_eq!(log_sample_count(1200.0, 1024, 0.2), 41589);
        let cfg = ProbeConfig::theory(0.2, 1024);
        assert_eq!(cfg.agree_samples(), 10398);
        assert_eq!(cfg.heavy_samples(), 41589);
        assert_eq!(ProbeConfig::practical(0.2).agree_samples(), 2);
    }

    #[test]
    fn config_validation() {
        assert!(ProbeConfig::practical(0.2).validate().is_ok());
        assert!(ProbeConfig::practical(0.0).validate().is_err());
        assert!(ProbeConfig::practical(1.0).validate().is_err());
        let mut c = ProbeConfig::practical(0.2);
        c.practical_samples = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn clique_pair_agrees_closed() {
        let g = graph(4, &clique_edges(&[0, 1, 2, 3]));
        for eps in [0.01, 0.2, 0.9] {
            assert!(exact_agreement(&g, n(0), n(1), eps, Convention::Closed).unwrap());
        }
        // open: N(0) = {1,2,3}, N(1) = {0,2,3}, △ = {0,1}, 2 < 0.2·3 fails
        assert!(!exact_agreement(&g, n(0), n(1), 0.2, Convention::Open).unwrap());
    }

    #[test]
    fn non_adjacent_twins() {
        // u = 4, v = 5, both adjacent to 1,2,3 only
        let g = graph(6, &[(4, 1), (4, 2), (4, 3), (5, 1), (5, 2), (5, 3)]);
        // N[u] = {4,1,2,3}, N[v] = {5,1,2,3}: △ = {4,5}, 2 ≥ 0.4·4
        assert_eq!(symmetric_difference(&g, n(4), n(5), Convention::Closed).unwrap(), 2);
        assert!(!exact_agreement(&g, n(4), n(5), 0.4, Convention::Closed).unwrap());
        assert!(exact_agreement(&g, n(4), n(5), 0.6, Convention::Closed).unwrap());
    }

    #[test]
    fn disjoint_neighborhoods_disagree() {
        // 0-1 and 2-3, compare 0 and 2 in open convention
        let g = graph(4, &[(0, 1), (2, 3)]);
        assert!(!exact_agreement(&g, n(0), n(2), 0.9, Convention::Open).unwrap());
        assert!(!exact_agreement(&g, n(0), n(2), 0.9, Convention::Closed).unwrap());
    }

    #[test]
    fn exact_heavy_cases() {
        let ids: Vec<u64> = (0..8).collect();
        let g = graph(8, &clique_edges(&ids));
        for i in 0..8 {
            assert!(exact_heavy(&g, n(i), 0.2, Convention::Closed).unwrap());
        }
        // star K_{1,8}: N[c] has 9 nodes, N[leaf] = {leaf, c}; △ = 7 of 9
        let star: Vec<(u64, u64)> = (1..=8).map(|i| (0, i)).collect();
        let g = graph(9, &star);
        assert_eq!(symmetric_difference(&g, n(0), n(1), Convention::Closed).unwrap(), 7);
        assert!(!exact_heavy(&g, n(0), 0.2, Convention::Closed).unwrap());
        // a single edge: closed neighborhoods coincide
        let g = graph(2, &[(0, 1)]);
        assert!(exact_heavy(&g, n(0), 0.2, Convention::Closed).unwrap());
        let g = graph(1, &[]);
        assert_eq!(exact_heavy(&g, n(0), 0.2, Convention::Closed), Err(GraphError::ZeroDegree(n(0))));
    }

    #[test]
    fn probabilistic_extremes() {
        let mut rng = rng_from_seed(3);
        let mut c = ProbeCounters::default();
        let ids: Vec<u64> = (0..6).collect();
        let g = graph(6, &clique_edges(&ids));
        for route in [EvalRoute::Sampled, EvalRoute::Enumerated] {
            let mut cfg = ProbeConfig::theory(0.2, 64).with_route(route);
            cfg.theory_heavy_samples = 300;
            for _ in 0..20 {
                let v = probabilistic_agreement(&g, n(0), n(1), &cfg, &mut c, &mut rng).unwrap();
                assert!(v.is_yes());
                assert_eq!((v.stat_x, v.stat_y), (0.0, 0.0));
                assert!(heavy_probe(&g, n(2), &cfg, &mut c, &mut rng).unwrap().is_yes());
            }
        }
        let g = graph(4, &[(0, 1), (2, 3)]);
        for route in [EvalRoute::Sampled, EvalRoute::Enumerated] {
            let cfg = ProbeConfig::practical(0.2).with_route(route).with_convention(Convention::Open);
            for _ in 0..20 {
                let v = probabilistic_agreement(&g, n(0), n(2), &cfg, &mut c, &mut rng).unwrap();
                assert_eq!(v.answer, Answer::No);
                assert_eq!(v.stat_x, 1.0);
            }
        }
    }

    #[test]
    fn probe_errors() {
        let mut rng = rng_from_seed(3);
        let mut c = ProbeCounters::default();
        let g = graph(3, &[(0, 1)]);
        let cfg = ProbeConfig::practical(0.2);
        assert_eq!(
            probabilistic_agreement(&g, n(0), n(2), &cfg, &mut c, &mut rng),
            Err(GraphError::ZeroDegree(n(2)))
        );
        assert_eq!(heavy_probe(&g, n(9), &cfg, &mut c, &mut rng), Err(GraphError::UnknownNode(n(9))));
    }

    #[test]
    fn sampled_route_charges_queries() {
        let mut rng = rng_from_seed(5);
        let mut c = ProbeCounters::default();
        let g = graph(3, &clique_edges(&[0, 1, 2]));
        let cfg = ProbeConfig::practical(0.2).with_route(EvalRoute::Sampled);
        probabilistic_agreement(&g, n(0), n(1), &cfg, &mut c, &mut rng).unwrap();
        assert_eq!(c.agreement_calls, 1);
        assert_eq!(c.sample_queries, 4);
        assert_eq!(c.edge_queries, 8);
        heavy_probe(&g, n(0), &cfg, &mut c, &mut rng).unwrap();
        assert_eq!(c.heavy_calls, 1);
        assert_eq!(c.agreement_calls, 3);
    }
}
