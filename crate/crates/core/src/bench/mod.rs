//! Experiment harness: checkpointed stream runs, the density sweep, and the
//! differential oracle suites.

mod density;
pub mod fixtures;
mod oracle;

pub use density::{density_bench, density_csv, DensityConfig, DensityRow};
pub use oracle::{oracle_check, OracleConfig, SuiteResult};

use std::fmt::Write as _;

use crate::baselines::{cost, CostBreakdown};
use crate::error::Result;
use crate::registry::{AlgCounters, StreamClusterer};
use crate::stream::StreamEvent;

pub const CHECKPOINT_EVERY: usize = 10;

/// One algorithm's state at one checkpoint.
#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    /// Events processed so far.
    pub t: usize,
    pub alg: &'static str,
    pub n: usize,
    pub m: usize,
    pub cost: CostBreakdown,
    /// Cost of all-singletons on the same graph, i.e. `m`.
    pub singletons_cost: u64,
    pub counters: AlgCounters,
}

impl RunRecord {
    pub const CSV_HEADER: &'static str = "t,alg,n,m,cross_positive,intra_negative,total,singletons_total,relative,\
agreement_calls,heavy_calls,notify0,notify1,notify2,anchors,sparse_edges,touched";

    /// `total / singletons_total`; `None` on a graph without edges.
    pub fn relative(&self) -> Option<f64> {
        (self.singletons_cost > 0).then(|| self.cost.total as f64 / self.singletons_cost as f64)
    }

    pub fn csv_row(&self) -> String {
        let c = &self.counters;
        let rel = self.relative().map(|r| format!("{r:.6}")).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.t,
            self.alg,
            self.n,
            self.m,
            self.cost.cross_positive,
            self.cost.intra_negative,
            self.cost.total,
            self.singletons_cost,
            rel,
            c.agreement_calls,
            c.heavy_calls,
            c.notifications[0],
            c.notifications[1],
            c.notifications[2],
            c.anchors,
            c.sparse_edges,
            c.touched,
        )
    }
}

pub fn to_csv(records: &[RunRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(RunRecord::CSV_HEADER);
    out.push('\n');
    for r in records {
        writeln!(out, "{}", r.csv_row()).unwrap();
    }
    out
}

/// Feeds `events` to every algorithm and records each of them after every
/// `every`-th event and after the last one.
pub fn run_stream(
    events: &[StreamEvent],
    algs: &mut [Box<dyn StreamClusterer>],
    every: usize,
) -> Result<Vec<RunRecord>> {
    let every = every.max(1);
    let mut out = Vec::new();
    for (i, e) in events.iter().enumerate() {
        for a in algs.iter_mut() {
            a.observe(e)?;
        }
        let t = i + 1;
        if t % every == 0 || t == events.len() {
            for a in algs.iter_mut() {
                out.push(snapshot(a.as_mut(), t)?);
            }
        }
    }
    Ok(out)
}

pub fn snapshot(alg: &mut dyn StreamClusterer, t: usize) -> Result<RunRecord> {
    let labels = alg.labels();
    let g = alg.graph();
    Ok(RunRecord {
        t,
        alg: alg.name(),
        n: g.node_count(),
        m: g.edge_count(),
        cost: cost(g, &labels)?,
        singletons_cost: g.edge_count() as u64,
        counters: alg.counters(),
    })
}
