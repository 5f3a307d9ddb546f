//! One run: ingest, constrain, model, solve, route, measure and render.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::json;

use demers::forcelayout::{run_frc, ForceConfig, ForceInit, QualityForce};
use demers::layout::{align_to_origins, decode, LayoutJson, SCHEMA_VERSION};
use demers::leaders::{all_leaders, LeaderStyle};
use demers::lpmodel::{build_iterative_sequence, build_multi_lp, ModelSpec, Objective, Stability};
use demers::mapdata::{compute_epsilon, load_map, load_weights, scale_weights, SideMapping, WeightKind};
use demers::metrics::{evaluate, stability_pairs, MetricsReport, MetricsRow};
use demers::render::{frame_name, render_frames, render_svg, RenderStyle};
use demers::sepconstraints::{derive_constraints, reduce_transitive, validate_dag, Setting};
use demers::simplexsolver::{solve_ilp_with, solve_lp_with, SolveStatus, SolverOptions};
use demers::{AdjacencyGraph, Point, SeparationConstraintSet, SideLengthTable, Solution, SquareLayout, WeightSet};

use crate::variant::Variant;

type BuiltModel = demers::lpmodel::BuiltModel<f64>;
type LeaderReport = demers::leaders::LeaderReport<f64>;

/// Model, solver and force-layout knobs shared by every run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tunables {
    pub secondary_weight: f64,
    pub adjacent_direction_boost: f64,
    pub stability_weight: f64,
    pub node_limit: u64,
    pub lp_time_limit_secs: f64,
    pub ilp_time_limit_secs: f64,
    /// Branch-and-bound pruning slack; below one it keeps the lost-edge
    /// count exact while skipping tie-breaker improvements.
    pub ilp_absolute_gap: f64,
    pub reduce_transitive: bool,
    pub area_proportional: bool,
    pub frc_disjointness: f64,
    pub frc_threshold: f64,
    pub frc_max_iterations: usize,
    pub frc_gap: f64,
}

impl Default for Tunables {
    fn default() -> Self {
        Tunables {
            secondary_weight: 1e-3,
            adjacent_direction_boost: 10.0,
            stability_weight: 1.0,
            node_limit: 100_000,
            lp_time_limit_secs: 60.0,
            ilp_time_limit_secs: 300.0,
            ilp_absolute_gap: 0.5,
            reduce_transitive: false,
            area_proportional: false,
            frc_disjointness: 50_000.0,
            frc_threshold: 1e-5,
            frc_max_iterations: 100_000,
            frc_gap: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub map: PathBuf,
    pub weights: PathBuf,
    #[serde(default = "default_kind")]
    pub weight_kind: WeightKind,
    pub variant: String,
    pub out: PathBuf,
    #[serde(default)]
    pub dataset: Option<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tunables: Tunables,
    #[serde(default)]
    pub dump_lp: bool,
    #[serde(default)]
    pub dump_constraints: bool,
    #[serde(default)]
    pub frames: usize,
    #[serde(default)]
    pub solver_log: bool,
}

fn default_kind() -> WeightKind {
    WeightKind::TimeSeries
}

impl RunConfig {
    pub fn new(map: impl Into<PathBuf>, weights: impl Into<PathBuf>, variant: &str, out: impl Into<PathBuf>) -> Self {
        RunConfig {
            map: map.into(),
            weights: weights.into(),
            weight_kind: default_kind(),
            variant: variant.into(),
            out: out.into(),
            dataset: None,
            seed: 0,
            tunables: Tunables::default(),
            dump_lp: false,
            dump_constraints: false,
            frames: 0,
            solver_log: false,
        }
    }

    pub fn dataset_name(&self) -> String {
        // A generic stem such as `map.geojson` says less than its folder.
        self.dataset.clone().unwrap_or_else(|| {
            let stem = self.map.file_stem().map(|s| s.to_string_lossy().into_owned());
            let parent = self
                .map
                .parent()
                .and_then(|p| p.file_name())
                .map(|s| s.to_string_lossy().into_owned());
            match (stem, parent) {
                (Some(s), Some(p)) if s == "map" => p,
                (Some(s), _) => s,
                (None, Some(p)) => p,
                (None, None) => "map".into(),
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "state", content = "reason", rename_all = "kebab-case")]
pub enum RunStatus {
    Ok,
    /// Usable layouts, but a resource limit was hit.
    Partial(String),
    Failed(String),
}

impl RunStatus {
    pub fn label(&self) -> String {
        match self {
            RunStatus::Ok => "ok".into(),
            RunStatus::Partial(r) => format!("partial:{r}"),
            RunStatus::Failed(r) => format!("failed:{r}"),
        }
    }

    pub fn is_ok(&self) -> bool {
        *self == RunStatus::Ok
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveRecord {
    pub label: String,
    pub status: SolveStatus,
    pub objective: f64,
    pub iterations: u64,
    pub nodes: u64,
    pub seconds: f64,
    pub max_violation: f64,
    pub variables: usize,
    pub constraints: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct FrcRecord {
    pub function: usize,
    pub iterations: usize,
    pub converged: bool,
    pub max_force: f64,
    pub overlap_area: f64,
    pub overlap_fraction: f64,
}

/// Everything a run produced, before it is written to disk.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub dataset: String,
    pub variant: String,
    pub status: RunStatus,
    pub function_names: Vec<String>,
    pub layouts: Vec<SquareLayout>,
    pub leaders: Vec<LeaderReport>,
    pub metrics: Option<MetricsReport>,
    pub constraints: Option<SeparationConstraintSet>,
    pub epsilon: f64,
    pub solves: Vec<SolveRecord>,
    pub frc: Vec<FrcRecord>,
    /// LP-format text of each solved program, kept when requested.
    pub lp_dumps: Vec<(String, String)>,
    pub timings: Vec<(String, f64)>,
}

impl RunOutcome {
    fn new(dataset: &str, variant: &str) -> Self {
        RunOutcome {
            dataset: dataset.into(),
            variant: variant.into(),
            status: RunStatus::Ok,
            function_names: Vec::new(),
            layouts: Vec::new(),
            leaders: Vec::new(),
            metrics: None,
            constraints: None,
            epsilon: 0.0,
            solves: Vec::new(),
            frc: Vec::new(),
            lp_dumps: Vec::new(),
            timings: Vec::new(),
        }
    }

    pub fn row(&self) -> MetricsRow {
        match &self.metrics {
            Some(m) if !matches!(self.status, RunStatus::Failed(_)) => {
                MetricsRow::from_report(&self.dataset, &self.variant, &self.status.label(), m)
            }
            _ => MetricsRow::failed(&self.dataset, &self.variant, &self.status.label()),
        }
    }

    fn fail(&mut self, reason: impl Into<String>) {
        self.status = RunStatus::Failed(reason.into());
    }

    fn partial(&mut self, reason: impl Into<String>) {
        if self.status == RunStatus::Ok {
            self.status = RunStatus::Partial(reason.into());
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ExecOptions {
    pub solver_log: bool,
    pub keep_lp: bool,
}

fn side_table(weights: &WeightSet, map: &AdjacencyGraph, t: &Tunables) -> SideLengthTable {
    let mapping = if t.area_proportional {
        SideMapping::AreaProportional
    } else {
        SideMapping::SideLength
    };
    scale_weights(weights, map, mapping)
}

/// Runs `variant` on in-memory data. Failures are reported in the outcome
/// status rather than as errors.
pub fn execute(
    dataset: &str,
    variant: Variant,
    map: &AdjacencyGraph,
    weights: &WeightSet,
    tunables: &Tunables,
    opts: ExecOptions,
) -> RunOutcome {
    let started = Instant::now();
    let mut out = RunOutcome::new(dataset, &variant.to_string());
    out.function_names = weights.functions.iter().map(|f| f.name.clone()).collect();
    let table = side_table(weights, map, tunables);
    out.epsilon = compute_epsilon(&table);
    match variant {
        Variant::Lp {
            objective,
            setting,
            stability,
        } => run_lp(&mut out, map, &table, objective, setting, stability, tunables, opts),
        Variant::Frc { quality, init } => run_force(&mut out, map, &table, quality, init, tunables),
    }
    if !out.layouts.is_empty() {
        let t = Instant::now();
        let pairs = stability_pairs(weights.kind, out.layouts.len());
        out.metrics = Some(evaluate(&out.layouts, map, &pairs));
        out.timings.push(("metrics".into(), t.elapsed().as_secs_f64()));
    }
    out.timings.push(("total".into(), started.elapsed().as_secs_f64()));
    out
}

fn solver_options(t: &Tunables, integer: bool, log: bool) -> SolverOptions {
    let secs = if integer { t.ilp_time_limit_secs } else { t.lp_time_limit_secs };
    SolverOptions {
        node_limit: t.node_limit,
        absolute_gap: if integer { t.ilp_absolute_gap } else { 0.0 },
        time_limit: (secs > 0.0).then(|| Duration::from_secs_f64(secs)),
        log,
        ..SolverOptions::default()
    }
}

fn record(out: &mut RunOutcome, label: String, model: &BuiltModel, sol: &Solution) {
    out.solves.push(SolveRecord {
        label,
        status: sol.status,
        objective: sol.objective,
        iterations: sol.stats.iterations,
        nodes: sol.stats.nodes,
        seconds: sol.stats.wall_time.as_secs_f64(),
        max_violation: sol.stats.max_violation,
        variables: model.problem.num_vars(),
        constraints: model.problem.constraints.len(),
    });
}

/// Starting point for the binary program taken from the TOP twin model:
/// shared variables by name, each indicator set when its edge is lost.
fn cnt_hint(cnt: &BuiltModel, top: &BuiltModel, top_sol: &Solution) -> Vec<f64> {
    let by_name: HashMap<&str, f64> = top
        .problem
        .variables
        .iter()
        .zip(&top_sol.values)
        .map(|(v, &x)| (v.name.as_str(), x))
        .collect();
    let mut hint: Vec<f64> = cnt
        .problem
        .variables
        .iter()
        .map(|v| by_name.get(v.name.as_str()).copied().unwrap_or(0.0))
        .collect();
    for block in &cnt.blocks {
        for e in &block.edges {
            if let Some(b) = e.lost {
                let big_m = cnt
                    .problem
                    .constraints
                    .iter()
                    .find_map(|c| c.terms.iter().find(|&&(v, _)| v == b).map(|&(_, m)| -m))
                    .unwrap_or(1.0);
                let gap = hint[e.h.0] + hint[e.v.0];
                hint[b.0] = if gap > 1e-8 * big_m { 1.0 } else { 0.0 };
            }
        }
    }
    hint
}

/// Solves `model`; for CNT the TOP twin is solved first to seed the search.
fn solve_model(
    out: &mut RunOutcome,
    label: String,
    model: &BuiltModel,
    twin: Option<&BuiltModel>,
    t: &Tunables,
    opts: ExecOptions,
) -> Solution {
    if opts.keep_lp {
        out.lp_dumps.push((format!("{label}.lp"), model.problem.to_lp_format()));
    }
    if !model.problem.has_integers() {
        let sol = solve_lp_with(&model.problem, &solver_options(t, false, opts.solver_log));
        record(out, label, model, &sol);
        return sol;
    }
    let hint = twin.and_then(|twin| {
        let sol = solve_lp_with(&twin.problem, &solver_options(t, false, opts.solver_log));
        record(out, format!("{label}-seed"), twin, &sol);
        (sol.status == SolveStatus::Optimal).then(|| cnt_hint(model, twin, &sol))
    });
    let sol = solve_ilp_with(&model.problem, &solver_options(t, true, opts.solver_log), hint.as_deref());
    record(out, label, model, &sol);
    sol
}

fn status_reason(s: SolveStatus) -> &'static str {
    match s {
        SolveStatus::Optimal => "optimal",
        SolveStatus::Infeasible => "infeasible",
        SolveStatus::Unbounded => "unbounded",
        SolveStatus::IterationLimit => "time-limit",
        SolveStatus::NodeLimit => "node-limit",
    }
}

#[allow(clippy::too_many_arguments)]
fn run_lp(
    out: &mut RunOutcome,
    map: &AdjacencyGraph,
    table: &SideLengthTable,
    objective: Objective,
    setting: Setting,
    stability: Stability,
    t: &Tunables,
    opts: ExecOptions,
) {
    let clock = Instant::now();
    let cs = match derive_constraints(map, out.epsilon, setting) {
        Ok(cs) => cs,
        Err(e) => return out.fail(format!("constraints: {e}")),
    };
    if let Err(cycle) = validate_dag(&cs) {
        return out.fail(format!("constraint cycle through {cycle:?}"));
    }
    let model_cs = if t.reduce_transitive { reduce_transitive(&cs) } else { cs.clone() };
    out.timings.push(("constraints".into(), clock.elapsed().as_secs_f64()));

    let spec = ModelSpec {
        objective,
        stability,
        secondary_weight: t.secondary_weight,
        adjacent_direction_boost: t.adjacent_direction_boost,
        stability_weight: t.stability_weight,
    };
    let top_spec = ModelSpec {
        objective: Objective::Top,
        ..spec
    };
    let is_cnt = objective == Objective::Cnt;
    let clock = Instant::now();
    let mut layouts: Vec<SquareLayout> = Vec::new();
    let mut anchored = true;

    let accept = |out: &mut RunOutcome, model: &BuiltModel, sol: &Solution| -> Option<Vec<SquareLayout>> {
        match sol.status {
            SolveStatus::Optimal => {}
            SolveStatus::NodeLimit | SolveStatus::IterationLimit if sol.has_point() => {
                out.partial(status_reason(sol.status));
            }
            s => {
                out.fail(status_reason(s));
                return None;
            }
        }
        // a time-limited incumbent decodes like a node-limited one
        let mut sol = sol.clone();
        if sol.status == SolveStatus::IterationLimit {
            sol.status = SolveStatus::NodeLimit;
        }
        match decode(&sol, model, map, table, &cs) {
            Ok(l) => Some(l),
            Err(e) => {
                out.fail(format!("decode: {e}"));
                None
            }
        }
    };

    if stability == Stability::It {
        let seq = match build_iterative_sequence(map, table, &model_cs, &spec) {
            Ok(s) => s,
            Err(e) => return out.fail(format!("model: {e}")),
        };
        let top_seq = build_iterative_sequence(map, table, &model_cs, &top_spec).ok();
        let mut prev: Option<Vec<Point>> = None;
        for step in 0..seq.len() {
            let model = match seq.step(step, prev.as_deref()) {
                Ok(m) => m,
                Err(e) => return out.fail(format!("model: {e}")),
            };
            let twin = if is_cnt {
                top_seq.as_ref().and_then(|s| s.step(step, prev.as_deref()).ok())
            } else {
                None
            };
            let sol = solve_model(out, format!("step{step}"), &model, twin.as_ref(), t, opts);
            let Some(mut l) = accept(out, &model, &sol) else { return };
            let layout = l.remove(0);
            prev = Some(layout.centers.clone());
            layouts.push(layout);
        }
    } else {
        let model = match build_multi_lp(map, table, &model_cs, &spec) {
            Ok(m) => m,
            Err(e) => return out.fail(format!("model: {e}")),
        };
        let twin = if is_cnt {
            build_multi_lp(map, table, &model_cs, &top_spec).ok()
        } else {
            None
        };
        let sol = solve_model(out, "joint".into(), &model, twin.as_ref(), t, opts);
        let Some(l) = accept(out, &model, &sol) else { return };
        anchored = model.anchored;
        layouts = l;
    }
    out.timings.push(("solve".into(), clock.elapsed().as_secs_f64()));
    if !anchored {
        align_to_origins(&mut layouts, map);
    }

    let clock = Instant::now();
    let style = match setting {
        Setting::Strong => LeaderStyle::FewBends,
        Setting::Weak => LeaderStyle::Minimal,
    };
    out.leaders = layouts.iter().map(|l| all_leaders(l, &cs, map, style)).collect();
    out.timings.push(("leaders".into(), clock.elapsed().as_secs_f64()));
    out.layouts = layouts;
    out.constraints = Some(cs);
}

fn run_force(
    out: &mut RunOutcome,
    map: &AdjacencyGraph,
    table: &SideLengthTable,
    quality: QualityForce,
    init: ForceInit,
    t: &Tunables,
) {
    let clock = Instant::now();
    let mut cfg = ForceConfig::new(quality, init);
    cfg.disjointness_scale = t.frc_disjointness;
    cfg.threshold = t.frc_threshold;
    cfg.max_iterations = t.frc_max_iterations;
    cfg.gap = t.frc_gap;
    let mut prev: Option<SquareLayout> = None;
    for fi in 0..table.k() {
        let res = run_frc(map, table.function(fi), fi, &cfg, prev.as_ref());
        out.frc.push(FrcRecord {
            function: fi,
            iterations: res.iterations,
            converged: res.converged,
            max_force: res.max_force,
            overlap_area: res.overlap_area,
            overlap_fraction: res.overlap_fraction,
        });
        if !res.converged {
            out.partial("not-converged");
        }
        prev = Some(res.layout.clone());
        out.layouts.push(res.layout);
        out.leaders.push(LeaderReport::default());
    }
    out.timings.push(("force".into(), clock.elapsed().as_secs_f64()));
}

/// Layout document for function `i`, with leaders and run details.
pub fn layout_document(outcome: &RunOutcome, i: usize) -> LayoutJson {
    let layout = &outcome.layouts[i];
    let mut doc = layout.to_json();
    doc.function_name = outcome.function_names.get(layout.function_index).cloned();
    let report = &outcome.leaders[i];
    doc.leaders = report.leaders.iter().map(|l| l.to_json(&layout.ids)).collect();
    if let Some(f) = outcome.frc.get(i) {
        doc.method = Some("frc".into());
        doc.extra = Some(json!({
            "iterations": f.iterations,
            "converged": f.converged,
            "max_force": f.max_force,
            "overlap_area": f.overlap_area,
            "overlap_fraction": f.overlap_fraction,
        }));
    } else {
        doc.method = Some("lp".into());
        let unroutable: Vec<_> = report
            .unroutable
            .iter()
            .map(|(a, b, e)| json!({ "from": layout.ids[*a], "to": layout.ids[*b], "reason": e.to_string() }))
            .collect();
        doc.extra = Some(json!({
            "lost": outcome.metrics.as_ref().map(|m| m.lost[i]),
            "unroutable": unroutable,
            "leader_overlaps": report.overlapping_pairs,
        }));
    }
    doc
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Writes the metrics rows as CSV.
pub fn write_rows(path: &Path, rows: &[MetricsRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes every artifact of `outcome` below `dir`.
pub fn write_artifacts(outcome: &RunOutcome, cfg: &RunConfig, map: &AdjacencyGraph, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let style = RenderStyle::new(map.diagonal());
    for i in 0..outcome.layouts.len() {
        let doc = layout_document(outcome, i);
        write_json(&dir.join(format!("layout_{i:02}.json")), &doc)?;
        let report = &outcome.leaders[i];
        write_json(
            &dir.join(format!("leaders_{i:02}.json")),
            &json!({
                "schema_version": SCHEMA_VERSION,
                "function": i,
                "leaders": doc.leaders,
                "unroutable": report.unroutable.len(),
                "overlapping_pairs": report.overlapping_pairs,
            }),
        )?;
        let svg = render_svg(&outcome.layouts[i], &report.leaders, &style);
        fs::write(dir.join(format!("layout_{i:02}.svg")), svg)?;
    }
    if cfg.frames > 0 && outcome.constraints.is_some() {
        for i in 1..outcome.layouts.len() {
            let frames = render_frames(&outcome.layouts[i - 1], &outcome.layouts[i], cfg.frames, &style)?;
            let sub = dir.join(format!("frames_{:02}_{i:02}", i - 1));
            fs::create_dir_all(&sub)?;
            for (f, svg) in frames.iter().enumerate() {
                fs::write(sub.join(frame_name(f)), svg)?;
            }
        }
    } else if cfg.frames > 0 {
        log::warn!("force-directed layouts share no constraints; skipping animation frames");
    }
    if let Some(m) = &outcome.metrics {
        write_json(&dir.join("metrics.json"), m)?;
    }
    write_rows(&dir.join("metrics.csv"), &[outcome.row()])?;
    if cfg.dump_lp {
        for (name, text) in &outcome.lp_dumps {
            fs::write(dir.join(name), text)?;
        }
    }
    if cfg.dump_constraints {
        if let Some(cs) = &outcome.constraints {
            let ids: Vec<String> = map.regions().iter().map(|r| r.id.clone()).collect();
            fs::write(dir.join("constraints.dot"), cs.to_dot(&ids))?;
        }
    }
    let timings: serde_json::Map<String, serde_json::Value> =
        outcome.timings.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
    write_json(
        &dir.join("manifest.json"),
        &json!({
            "schema_version": SCHEMA_VERSION,
            "dataset": outcome.dataset,
            "variant": outcome.variant,
            "status": outcome.status,
            "seed": cfg.seed,
            "map": cfg.map,
            "weights": cfg.weights,
            "weight_kind": cfg.weight_kind,
            "functions": outcome.function_names,
            "epsilon": outcome.epsilon,
            "constraints": outcome.constraints.as_ref().map(|c| c.len()),
            "tunables": cfg.tunables,
            "timings": timings,
            "solves": outcome.solves,
            "frc": outcome.frc,
        }),
    )?;
    Ok(())
}

/// Loads inputs, executes, and writes artifacts to `cfg.out`.
pub fn run(cfg: &RunConfig) -> Result<RunOutcome> {
    let variant: Variant = cfg.variant.parse().map_err(anyhow::Error::msg)?;
    let clock = Instant::now();
    let map: AdjacencyGraph = load_map(&cfg.map).with_context(|| format!("loading {}", cfg.map.display()))?;
    let weights = load_weights(&cfg.weights, &map, cfg.weight_kind)
        .with_context(|| format!("loading {}", cfg.weights.display()))?;
    let load = clock.elapsed().as_secs_f64();
    let opts = ExecOptions {
        solver_log: cfg.solver_log,
        keep_lp: cfg.dump_lp,
    };
    let mut outcome = execute(&cfg.dataset_name(), variant, &map, &weights, &cfg.tunables, opts);
    outcome.timings.insert(0, ("load".into(), load));
    write_artifacts(&outcome, cfg, &map, &cfg.out)?;
    Ok(outcome)
}
