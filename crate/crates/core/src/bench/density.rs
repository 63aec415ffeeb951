use std::fmt::Write as _;

use crate::dcc::DccConfig;
use crate::error::Result;
use crate::registry::Registry;
use crate::stream::{gaussian_points, gen_stream, tau_for_average_degree, threshold_graph, GapDeletion};

#[derive(Clone, Debug)]
pub struct DensityConfig {
    pub points: usize,
    pub dim: usize,
    pub clusters: usize,
    pub center_spread: f64,
    pub target_degrees: Vec<f64>,
    pub dcc: DccConfig,
    pub p_delete: f64,
    pub seed: u64,
}

impl Default for DensityConfig {
    fn default() -> Self {
        Self {
            points: 2000,
            dim: 4,
            clusters: 10,
            center_spread: 3.0,
            target_degrees: vec![40.0, 80.0, 160.0],
            dcc: DccConfig::practical(0.2, 0),
            p_delete: 0.2,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityRow {
    pub target_degree: f64,
    pub tau: f64,
    pub avg_degree: f64,
    pub alg: &'static str,
    pub events: usize,
    /// Probe calls for `da`, touched nodes for `pivot-dyn`.
    pub work: u64,
}

impl DensityRow {
    pub const CSV_HEADER: &'static str = "target_degree,tau,avg_degree,alg,events,work,work_per_update";

    pub fn per_update(&self) -> f64 {
        self.work as f64 / self.events.max(1) as f64
    }
}

pub fn density_csv(rows: &[DensityRow]) -> String {
    let mut out = format!("{}\n", DensityRow::CSV_HEADER);
    for r in rows {
        writeln!(
            out,
            "{},{:.6},{:.3},{},{},{},{:.6}",
            r.target_degree,
            r.tau,
            r.avg_degree,
            r.alg,
            r.events,
            r.work,
            r.per_update()
        )
        .unwrap();
    }
    out
}

/// One point cloud, one threshold per target degree, and a DA plus a
/// dynamic-Pivot run over the same stream at each threshold.
pub fn density_bench(cfg: &DensityConfig) -> Result<Vec<DensityRow>> {
    let points = gaussian_points(cfg.points, cfg.dim, cfg.clusters, cfg.center_spread, cfg.seed);
    let registry = Registry::default();
    let mut rows = Vec::new();
    for &target in &cfg.target_degrees {
        let tau = tau_for_average_degree(&points, target)?;
        let src = threshold_graph(&points, tau)?;
        let events = gen_stream(&src, cfg.p_delete, cfg.seed, GapDeletion::OneCoin)?;
        let mut dcc = cfg.dcc.clone();
        dcc.seed = cfg.seed;
        for name in ["da", "pivot-dyn"] {
            let mut alg = registry.build(name, &dcc)?;
            for e in &events {
                alg.observe(e)?;
            }
            let c = alg.counters();
            rows.push(DensityRow {
                target_degree: target,
                tau,
                avg_degree: src.average_degree(),
                alg: alg.name(),
                events: events.len(),
                work: if name == "da" { c.probe_calls() } else { c.touched },
            });
        }
    }
    Ok(rows)
}
