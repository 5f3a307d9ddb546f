use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use demers::mapdata::WeightKind;
use demers_cli::matrix::{run_spec, Dataset, MatrixSpec};
use demers_cli::pipeline::{run, RunConfig, Tunables};
use demers_cli::synth::{grid_instance, GridSpec};
use demers_cli::Variant;

#[derive(Parser)]
#[command(name = "demers", version, about = "Stable Demers cartograms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute layouts for one map, weight table and variant.
    Run(RunArgs),
    /// Run every (dataset, variant) of a matrix spec and write matrix.csv.
    Matrix {
        #[arg(long)]
        spec: PathBuf,
        /// Worker threads (overrides DEMERS_THREADS).
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        solver_log: bool,
    },
    /// Write seeded jittered-grid benchmark instances and a matrix spec.
    Synth(SynthArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    map: PathBuf,
    #[arg(long)]
    weights: PathBuf,
    /// For example TOP-S-SU, CNT-W-IT or FRC-O-S.
    #[arg(long)]
    variant: String,
    #[arg(long)]
    out: PathBuf,
    /// time-series or weight-vectors.
    #[arg(long, default_value = "time-series")]
    kind: WeightKind,
    #[arg(long)]
    dataset: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    dump_lp: bool,
    #[arg(long)]
    dump_constraints: bool,
    /// Map values to square area instead of side length.
    #[arg(long)]
    area_proportional: bool,
    /// Drop implied separation constraints before building the program.
    #[arg(long)]
    reduce_transitive: bool,
    /// Animation frames between consecutive layouts.
    #[arg(long, default_value_t = 0)]
    frames: usize,
    #[arg(long)]
    solver_log: bool,
    #[arg(long)]
    secondary_weight: Option<f64>,
    #[arg(long)]
    direction_boost: Option<f64>,
    /// Weight of displacement between layouts.
    #[arg(long)]
    stability_weight: Option<f64>,
    #[arg(long)]
    node_limit: Option<u64>,
    /// Seconds per LP solve (0 disables).
    #[arg(long)]
    lp_time_limit: Option<f64>,
    /// Seconds per binary program (0 disables).
    #[arg(long)]
    ilp_time_limit: Option<f64>,
    #[arg(long)]
    frc_max_iterations: Option<usize>,
}

#[derive(Args)]
struct SynthArgs {
    /// Grid size n for an n x n map.
    #[arg(long, default_value_t = 5)]
    grid: usize,
    /// Rows, overriding --grid.
    #[arg(long)]
    rows: Option<usize>,
    /// Columns, overriding --grid.
    #[arg(long)]
    cols: Option<usize>,
    #[arg(long, default_value_t = 20)]
    seeds: u64,
    #[arg(long, default_value_t = 0)]
    first_seed: u64,
    /// Weight functions per instance.
    #[arg(long, default_value_t = 4)]
    k: usize,
    #[arg(long, default_value = "time-series")]
    kind: WeightKind,
    #[arg(long, default_value = "synth")]
    out: PathBuf,
}

fn init_logging(solver_log: bool) {
    let level = if solver_log { "debug" } else { "warn" };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
}

fn tunables(a: &RunArgs) -> Tunables {
    let mut t = Tunables {
        area_proportional: a.area_proportional,
        reduce_transitive: a.reduce_transitive,
        ..Tunables::default()
    };
    if let Some(v) = a.secondary_weight {
        t.secondary_weight = v;
    }
    if let Some(v) = a.direction_boost {
        t.adjacent_direction_boost = v;
    }
    if let Some(v) = a.stability_weight {
        t.stability_weight = v;
    }
    if let Some(v) = a.node_limit {
        t.node_limit = v;
    }
    if let Some(v) = a.lp_time_limit {
        t.lp_time_limit_secs = v;
    }
    if let Some(v) = a.ilp_time_limit {
        t.ilp_time_limit_secs = v;
    }
    if let Some(v) = a.frc_max_iterations {
        t.frc_max_iterations = v;
    }
    t
}

fn cmd_run(a: RunArgs) -> Result<bool> {
    init_logging(a.solver_log);
    let cfg = RunConfig {
        weight_kind: a.kind,
        dataset: a.dataset.clone(),
        seed: a.seed,
        tunables: tunables(&a),
        dump_lp: a.dump_lp,
        dump_constraints: a.dump_constraints,
        frames: a.frames,
        solver_log: a.solver_log,
        ..RunConfig::new(&a.map, &a.weights, &a.variant, &a.out)
    };
    let outcome = run(&cfg)?;
    println!(
        "{} {}: {} ({} layouts) -> {}",
        outcome.dataset,
        outcome.variant,
        outcome.status.label(),
        outcome.layouts.len(),
        cfg.out.display()
    );
    if let Some(m) = &outcome.metrics {
        println!(
            "MADJ {:.4}  MREL {:.4}  MDIS {:.4}  SDIS {:.4}  SREL {:.4}",
            m.avg_madj, m.avg_mrel, m.avg_mdis, m.avg_sdis, m.avg_srel
        );
    }
    Ok(outcome.status.is_ok())
}

fn cmd_matrix(spec: PathBuf, threads: Option<usize>, solver_log: bool) -> Result<bool> {
    init_logging(solver_log);
    if let Some(n) = threads {
        std::env::set_var("DEMERS_THREADS", n.to_string());
    }
    let spec = MatrixSpec::load(&spec)?;
    let (rows, path) = run_spec(&spec)?;
    let ok = rows.iter().filter(|r| r.status == "ok").count();
    println!("{ok}/{} runs ok -> {}", rows.len(), path.display());
    Ok(ok == rows.len())
}

fn cmd_synth(a: SynthArgs) -> Result<bool> {
    init_logging(false);
    let grid = GridSpec {
        rows: a.rows.unwrap_or(a.grid),
        cols: a.cols.unwrap_or(a.grid),
        k: a.k,
        kind: a.kind,
        ..GridSpec::square(a.grid)
    };
    std::fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let mut datasets = Vec::new();
    for seed in a.first_seed..a.first_seed + a.seeds {
        let inst = grid_instance(&grid, seed)?;
        let dir = a.out.join(&inst.name);
        std::fs::create_dir_all(&dir)?;
        std::fs::write(dir.join("map.geojson"), &inst.geojson)?;
        std::fs::write(dir.join("weights.csv"), &inst.csv)?;
        datasets.push(Dataset {
            name: inst.name.clone(),
            map: PathBuf::from(&inst.name).join("map.geojson"),
            weights: PathBuf::from(&inst.name).join("weights.csv"),
            weight_kind: a.kind,
        });
    }
    let spec = MatrixSpec {
        schema_version: 1,
        out: PathBuf::from("results"),
        datasets,
        variants: Variant::standard_set().iter().map(|v| v.to_string()).collect(),
        tunables: Tunables::default(),
        frames: 0,
    };
    let path = a.out.join("matrix.json");
    std::fs::write(&path, serde_json::to_string_pretty(&spec)? + "\n")?;
    println!("{} instances -> {}", a.seeds, path.display());
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Matrix {
            spec,
            threads,
            solver_log,
        } => cmd_matrix(spec, threads, solver_log),
        Command::Synth(a) => cmd_synth(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
