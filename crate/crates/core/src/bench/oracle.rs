use std::fmt;

use rand::Rng;

use super::fixtures::{agreement_pair, fuzz_events, heavy_star, heavy_star_private_size, random_sparse_solution, small_graph};
use crate::baselines::{brute_force_opt, cost, pivot_with_priorities, DynamicPivot};
use crate::dcc::{DccConfig, DynamicAgreement};
use crate::error::Result;
use crate::extraction::{components_bfs, compute_components};
use crate::graph_store::{DynamicGraph, NodeId};
use crate::probes::{heavy_probe, probabilistic_agreement, EvalRoute, ProbeConfig, ProbeCounters};
use crate::stream::{arrival_phase_len, gen_stream, GapDeletion};
use crate::{rng_from_seed, SimRng};

#[derive(Clone, Debug)]
pub struct OracleConfig {
    pub seed: u64,
    pub probe_trials: usize,
    pub extraction_trials: usize,
    pub pivot_trials: usize,
    pub opt_trials: usize,
    pub fuzz_events: usize,
    /// Corrupt the sparse solution before the invariant suite checks it.
    pub inject_fault: bool,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            probe_trials: 200,
            extraction_trials: 300,
            pivot_trials: 40,
            opt_trials: 50,
            fuzz_events: 2000,
            inject_fault: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub trials: usize,
    pub successes: usize,
    /// Required success rate.
    pub required: f64,
}

impl SuiteResult {
    pub fn rate(&self) -> f64 {
        if self.trials == 0 {
            1.0
        } else {
            self.successes as f64 / self.trials as f64
        }
    }

    pub fn passed(&self) -> bool {
        self.rate() >= self.required
    }
}

impl fmt::Display for SuiteResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<22} {:>5}/{:<5} rate {:.4} (need {:.2})",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.successes,
            self.trials,
            self.rate(),
            self.required
        )
    }
}

fn count(trials: usize, mut ok: impl FnMut(usize) -> Result<bool>) -> Result<usize> {
    let mut n = 0;
    for i in 0..trials {
        if ok(i)? {
            n += 1;
        }
    }
    Ok(n)
}

/// Probe configuration for the sandwich suites: theory sample sizes for
/// `n = 1024`, `eps = 0.2`.
pub fn sandwich_config() -> ProbeConfig {
    ProbeConfig::theory(0.2, 1024).with_route(EvalRoute::Auto)
}

/// YES counts of the agreement probe on a 0.1eps-agreement pair and NO counts
/// on a pair just outside eps-agreement.
pub fn agreement_sandwich(trials: usize, rng: &mut SimRng) -> Result<(usize, usize)> {
    let cfg = sandwich_config();
    let mut c = ProbeCounters::default();
    let (g, u, v) = agreement_pair(400, 4, 4);
    let yes = count(trials, |_| Ok(probabilistic_agreement(&g, u, v, &cfg, &mut c, rng)?.is_yes()))?;
    let (g, u, v) = agreement_pair(400, 45, 45);
    let no = count(trials, |_| Ok(!probabilistic_agreement(&g, u, v, &cfg, &mut c, rng)?.is_yes()))?;
    Ok((yes, no))
}

/// YES counts of the heavy probe on a node in 0.1eps-agreement with exactly
/// a `1 - eps` share of its neighbors, and NO counts on a node out of
/// eps-agreement with a `2 eps` share.
pub fn heavy_sandwich(trials: usize, rng: &mut SimRng) -> Result<(usize, usize)> {
    let cfg = sandwich_config();
    let mut c = ProbeCounters::default();
    let (g, u) = heavy_star(80, 20, heavy_star_private_size(80, 20, 0.2));
    let yes = count(trials, |_| Ok(heavy_probe(&g, u, &cfg, &mut c, rng)?.is_yes()))?;
    let (g, u) = heavy_star(60, 40, heavy_star_private_size(60, 40, 0.2));
    let no = count(trials, |_| Ok(!heavy_probe(&g, u, &cfg, &mut c, rng)?.is_yes()))?;
    Ok((yes, no))
}

/// Outcome of one DA-vs-OPT trial on a small graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OptTrial {
    pub da_cost: u64,
    pub opt_cost: u64,
    pub cliques: bool,
}

impl OptTrial {
    /// Within `5 OPT`, and exact on unions of cliques.
    pub fn ok(&self) -> bool {
        if self.opt_cost == 0 {
            !self.cliques || self.da_cost == 0
        } else {
            self.da_cost <= 5 * self.opt_cost
        }
    }
}

/// Runs DA over a small random graph's stream and compares its cost with the
/// optimum on the graph present when the last node has arrived.
pub fn da_opt_trial(seed: u64, p_delete: f64) -> Result<OptTrial> {
    let mut rng = rng_from_seed(seed);
    let src = small_graph(&mut rng);
    let events = gen_stream(&src, p_delete, seed, GapDeletion::OneCoin)?;
    let mut da = DynamicAgreement::new(DccConfig::practical(0.2, seed));
    for e in &events[..arrival_phase_len(&events)] {
        da.process_event(e)?;
    }
    let g = da.graph();
    let (_, opt) = brute_force_opt(g)?;
    Ok(OptTrial {
        da_cost: cost(g, &da.labels())?.total,
        opt_cost: opt.total,
        cliques: super::fixtures::is_union_of_cliques(g),
    })
}

/// Runs every differential suite.
pub fn oracle_check(cfg: &OracleConfig) -> Result<Vec<SuiteResult>> {
    let mut rng = rng_from_seed(cfg.seed);
    let mut out = Vec::new();

    let (yes, no) = agreement_sandwich(cfg.probe_trials, &mut rng)?;
    out.push(SuiteResult { name: "agreement-yes", trials: cfg.probe_trials, successes: yes, required: 0.99 });
    out.push(SuiteResult { name: "agreement-no", trials: cfg.probe_trials, successes: no, required: 0.99 });
    let (yes, no) = heavy_sandwich(cfg.probe_trials, &mut rng)?;
    out.push(SuiteResult { name: "heavy-yes", trials: cfg.probe_trials, successes: yes, required: 0.99 });
    out.push(SuiteResult { name: "heavy-no", trials: cfg.probe_trials, successes: no, required: 0.99 });

    let ok = count(cfg.extraction_trials, |_| {
        let n = rng.random_range(1..=512);
        let (sol, present) = random_sparse_solution(n, &mut rng);
        let ex = compute_components(&sol, &present);
        Ok(ex.labels.same_partition(&components_bfs(&sol, &present)) && ex.assignments <= 3 * n)
    })?;
    out.push(SuiteResult { name: "extraction-vs-bfs", trials: cfg.extraction_trials, successes: ok, required: 1.0 });

    let ok = count(cfg.pivot_trials, |_| {
        let mut dp = DynamicPivot::new();
        for e in fuzz_events(400, 120, &mut rng) {
            dp.observe(&e, &mut rng)?;
        }
        Ok(dp.labels().same_partition(&pivot_with_priorities(dp.graph(), dp.priorities())))
    })?;
    out.push(SuiteResult { name: "pivot-dyn-vs-offline", trials: cfg.pivot_trials, successes: ok, required: 1.0 });

    let base = cfg.seed.wrapping_mul(1_000_003);
    let ok = count(cfg.opt_trials, |i| Ok(da_opt_trial(base + i as u64, 0.2)?.ok()))?;
    out.push(SuiteResult { name: "da-vs-opt", trials: cfg.opt_trials, successes: ok, required: 0.9 });

    let mut da = DynamicAgreement::new(DccConfig::practical(0.2, cfg.seed));
    let events = fuzz_events(cfg.fuzz_events, 150, &mut rng);
    let ok = count(events.len(), |i| {
        da.process_event(&events[i])?;
        if cfg.inject_fault && i + 1 == events.len() {
            return Ok(corrupted_check(da.graph(), da.solution().clone()));
        }
        Ok(da.check_invariants().is_ok())
    })?;
    out.push(SuiteResult { name: "invariants", trials: events.len(), successes: ok, required: 1.0 });
    Ok(out)
}

/// Adds a sparse edge between two present non-adjacent nodes (or to an
/// absent node) and reports whether the invariant check still passes.
fn corrupted_check(g: &DynamicGraph, mut sol: crate::dcc::SparseSolution) -> bool {
    let a = g.sorted_nodes().first().copied().unwrap_or(NodeId(0));
    let ghost = NodeId(u64::MAX);
    sol.set_anchor(a);
    sol.add_edge(a, ghost);
    sol.check_invariants(g).is_ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_run_is_green_and_fault_is_caught() {
        let cfg = OracleConfig {
            probe_trials: 5,
            extraction_trials: 20,
            pivot_trials: 3,
            opt_trials: 10,
            fuzz_events: 200,
            ..Default::default()
        };
        let results = oracle_check(&cfg).unwrap();
        for r in &results {
            assert!(r.passed() || r.name == "da-vs-opt", "{r}");
        }
        let bad = oracle_check(&OracleConfig { inject_fault: true, ..cfg }).unwrap();
        assert!(!bad.iter().find(|r| r.name == "invariants").unwrap().passed());
    }
}
