use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use dyncc::bench::{self, density_bench, density_csv, oracle_check, DensityConfig, OracleConfig};
use dyncc::registry::Registry;
use dyncc::stream::{self, GapDeletion, SourceGraph};
use dyncc::DccConfig;

#[derive(Parser)]
#[command(name = "dyncc", version, about = "Dynamic correlation clustering over node streams")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run algorithms over one stream and write checkpoint records as CSV.
    Run(RunArgs),
    /// Sweep the threshold over a Gaussian point cloud and compare per-update work.
    DensityBench(DensityArgs),
    /// Run the differential suites and print pass/fail with measured rates.
    OracleCheck(OracleArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum SourceKind {
    EdgeList,
    Points,
    Planted,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Theory,
    Practical,
}

#[derive(Clone, Copy, ValueEnum)]
enum Gap {
    OneCoin,
    Geometric,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, value_enum)]
    source: SourceKind,
    /// Input file for edge-list and points sources.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Distance threshold for points sources.
    #[arg(long)]
    tau: Option<f64>,
    /// Planted partition as k,s,p_in,p_out.
    #[arg(long, default_value = "4,25,0.9,0.05")]
    planted: String,
    #[arg(long, default_value_t = 0.2)]
    epsilon: f64,
    #[arg(long, value_enum, default_value = "practical")]
    mode: Mode,
    /// Multiplier on the theory-mode anchor, connect and notify constants.
    #[arg(long, default_value_t = 1.0)]
    theory_scale: f64,
    #[arg(long, default_value_t = 0.2)]
    p_delete: f64,
    #[arg(long, value_enum, default_value = "one-coin")]
    gap: Gap,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = bench::CHECKPOINT_EVERY)]
    checkpoint_every: usize,
    #[arg(long, default_value = "da,pivot-dyn,singletons,agree-static")]
    algs: String,
    /// Output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DensityArgs {
    #[arg(long, default_value_t = 2000)]
    points: usize,
    #[arg(long, default_value_t = 4)]
    dim: usize,
    #[arg(long, default_value = "40,80,160")]
    degrees: String,
    #[arg(long, default_value_t = 0.2)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.2)]
    p_delete: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    probe_trials: usize,
    /// Corrupt the sparse solution to check that failures are reported.
    #[arg(long)]
    inject_fault: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.cmd {
        Cmd::Run(a) => cmd_run(&a).map(|()| true),
        Cmd::DensityBench(a) => cmd_density(&a).map(|()| true),
        Cmd::OracleCheck(a) => cmd_oracle(&a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>>
where
    T::Err: std::error::Error + Send + Sync + 'static,
{
    s.split(',').map(|x| x.trim().parse::<T>().with_context(|| format!("bad list item {x:?}"))).collect()
}

fn load_source(a: &RunArgs) -> Result<SourceGraph> {
    let input = || a.input.as_deref().context("--input is required for this source");
    Ok(match a.source {
        SourceKind::EdgeList => stream::load_edge_list(input()?)?,
        SourceKind::Points => {
            let tau = a.tau.context("--tau is required for points")?;
            stream::threshold_graph(&stream::load_points(input()?)?, tau)?
        }
        SourceKind::Planted => {
            let v: Vec<f64> = parse_list(&a.planted)?;
            let [k, s, p_in, p_out] = v[..] else { bail!("--planted takes k,s,p_in,p_out") };
            stream::planted_partition(k as usize, s as usize, p_in, p_out, a.seed)
        }
    })
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_run(a: &RunArgs) -> Result<()> {
    let src = load_source(a)?;
    let gap = match a.gap {
        Gap::OneCoin => GapDeletion::OneCoin,
        Gap::Geometric => GapDeletion::Geometric,
    };
    let events = stream::gen_stream(&src, a.p_delete, a.seed, gap)?;
    let dcc = match a.mode {
        Mode::Practical => DccConfig::practical(a.epsilon, a.seed),
        Mode::Theory => DccConfig::theory(a.epsilon, src.node_count, a.theory_scale, a.seed),
    };
    dcc.validate().map_err(anyhow::Error::msg)?;
    let mut algs = Registry::default().build_list(&a.algs, &dcc)?;
    let records = bench::run_stream(&events, &mut algs, a.checkpoint_every)?;
    write_out(a.out.as_deref(), &bench::to_csv(&records))
}

fn cmd_density(a: &DensityArgs) -> Result<()> {
    let cfg = DensityConfig {
        points: a.points,
        dim: a.dim,
        target_degrees: parse_list(&a.degrees)?,
        dcc: DccConfig::practical(a.epsilon, a.seed),
        p_delete: a.p_delete,
        seed: a.seed,
        ..Default::default()
    };
    let rows = density_bench(&cfg)?;
    write_out(a.out.as_deref(), &density_csv(&rows))
}

fn cmd_oracle(a: &OracleArgs) -> Result<bool> {
    let cfg = OracleConfig {
        seed: a.seed,
        probe_trials: a.probe_trials,
        inject_fault: a.inject_fault,
        ..Default::default()
    };
    let results = oracle_check(&cfg)?;
    for r in &results {
        println!("{r}");
    }
    Ok(results.iter().all(|r| r.passed()))
}
