//! Batches of runs sharing a map, executed in parallel.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use demers::mapdata::WeightKind;
use demers::metrics::MetricsRow;

use crate::pipeline::{run, write_rows, RunConfig, Tunables};

/// One input dataset of a matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub name: String,
    pub map: PathBuf,
    pub weights: PathBuf,
    #[serde(default = "default_kind")]
    pub weight_kind: WeightKind,
}

fn default_kind() -> WeightKind {
    WeightKind::TimeSeries
}

/// Matrix description read by `demers matrix --spec`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixSpec {
    #[serde(default = "one")]
    pub schema_version: u32,
    pub out: PathBuf,
    pub datasets: Vec<Dataset>,
    pub variants: Vec<String>,
    #[serde(default)]
    pub tunables: Tunables,
    #[serde(default)]
    pub frames: usize,
}

fn one() -> u32 {
    1
}

impl MatrixSpec {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut spec: MatrixSpec = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        // relative paths are taken from the spec file's directory
        let base = path.parent().unwrap_or(Path::new("."));
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut spec.out);
        for d in &mut spec.datasets {
            fix(&mut d.map);
            fix(&mut d.weights);
        }
        Ok(spec)
    }

    /// One config per (dataset, variant), datasets outermost.
    pub fn configs(&self) -> Vec<RunConfig> {
        let mut out = Vec::new();
        for d in &self.datasets {
            for v in &self.variants {
                let mut cfg = RunConfig::new(&d.map, &d.weights, v, self.out.join(&d.name).join(v));
                cfg.dataset = Some(d.name.clone());
                cfg.weight_kind = d.weight_kind;
                cfg.tunables = self.tunables.clone();
                cfg.frames = self.frames;
                out.push(cfg);
            }
        }
        out
    }
}

/// Worker count: `DEMERS_THREADS` if set, otherwise all cores.
pub fn worker_count() -> usize {
    let cores = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    std::env::var("DEMERS_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or(cores)
}

/// Runs every config and returns one row each, in input order. A run that
/// errors before producing an outcome gets a failed row.
pub fn run_matrix(configs: &[RunConfig]) -> Result<Vec<MetricsRow>> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(worker_count()).build()?;
    let rows = pool.install(|| {
        configs
            .par_iter()
            .map(|cfg| match run(cfg) {
                Ok(outcome) => outcome.row(),
                Err(e) => {
                    log::error!("{} {}: {e:#}", cfg.dataset_name(), cfg.variant);
                    MetricsRow::failed(&cfg.dataset_name(), &cfg.variant, &format!("failed:{e}"))
                }
            })
            .collect()
    });
    Ok(rows)
}

/// Runs a spec and writes the combined `matrix.csv` into its output dir.
pub fn run_spec(spec: &MatrixSpec) -> Result<(Vec<MetricsRow>, PathBuf)> {
    std::fs::create_dir_all(&spec.out)?;
    let rows = run_matrix(&spec.configs())?;
    let path = spec.out.join("matrix.csv");
    write_rows(&path, &rows)?;
    Ok((rows, path))
}
