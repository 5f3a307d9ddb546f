//! LP and binary-ILP solving for [`LpProblem`].
//!
//! Relaxations are solved by `microlp`'s sparse primal/dual simplex after
//! row and column equilibration. Integer programs run a depth-first
//! branch-and-bound on top of it: children are produced by fixing the most
//! fractional binary on a clone of the parent's solved tableau, so every
//! node is warm-started by dual simplex.

use std::time::{Duration, Instant};

use log::{debug, trace};
use microlp::{ComparisonOp, OptimizationDirection, Problem};

use crate::lpmodel::{Integrality, LpProblem, Relation, VarId};
use crate::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// A time budget ran out before an optimal basis was found.
    IterationLimit,
    /// Branch-and-bound stopped at the node limit; `values` hold the
    /// incumbent if there is one.
    NodeLimit,
}

#[derive(Clone, Debug, Default, PartialEq, serde::Serialize)]
pub struct SolveStats {
    pub iterations: u64,
    pub nodes: u64,
    pub wall_time: Duration,
    /// Largest constraint or bound violation of the returned point.
    pub max_violation: f64,
    /// Objective after each incumbent improvement (ILP only).
    pub incumbent_trace: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Solution<T> {
    pub status: SolveStatus,
    /// Value per variable, indexed by [`VarId`]. Empty when no point exists.
    pub values: Vec<T>,
    pub objective: T,
    pub stats: SolveStats,
}

impl<T: Scalar> Solution<T> {
    fn empty(status: SolveStatus, stats: SolveStats) -> Self {
        Solution {
            status,
            values: Vec::new(),
            objective: T::nan(),
            stats,
        }
    }

    pub fn value(&self, var: VarId) -> T {
        self.values[var.0]
    }

    /// Value of the variable called `name`.
    pub fn value_by_name(&self, problem: &LpProblem<T>, name: &str) -> Option<T> {
        let i = problem.variables.iter().position(|v| v.name == name)?;
        self.values.get(i).copied()
    }

    pub fn has_point(&self) -> bool {
        !self.values.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct SolverOptions {
    /// Absolute feasibility tolerance in the equilibrated problem.
    pub feasibility_tol: f64,
    pub integrality_tol: f64,
    /// Nodes whose bound is within this of the incumbent are pruned. With an
    /// integer-valued primary objective plus a tie-breaker below `1 - gap`,
    /// the search still finds the optimal primary value.
    pub absolute_gap: f64,
    pub node_limit: u64,
    pub time_limit: Option<Duration>,
    /// Apply row and column scaling before solving.
    pub equilibrate: bool,
    /// Emit per-node progress at `debug` level.
    pub log: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            feasibility_tol: 1e-7,
            integrality_tol: 1e-6,
            absolute_gap: 0.0,
            node_limit: 100_000,
            time_limit: None,
            equilibrate: true,
            log: false,
        }
    }
}

/// Row and column scale factors (powers of two, so scaling is exact).
#[derive(Clone, Debug)]
struct Scaling {
    row: Vec<f64>,
    col: Vec<f64>,
}

fn pow2_near(v: f64) -> f64 {
    if v.is_finite() && v > 0.0 {
        2f64.powi(v.log2().round() as i32)
    } else {
        1.0
    }
}

/// Geometric-mean equilibration, a few alternating passes.
fn equilibrate<T: Scalar>(p: &LpProblem<T>) -> Scaling {
    let mut row = vec![1.0; p.constraints.len()];
    let mut col = vec![1.0; p.num_vars()];
    for _ in 0..4 {
        for (i, c) in p.constraints.iter().enumerate() {
            let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
            for &(v, a) in &c.terms {
                let m = (a.as_f64() * col[v.0]).abs();
                if m > 0.0 {
                    lo = lo.min(m);
                    hi = hi.max(m);
                }
            }
            if hi > 0.0 {
                row[i] = pow2_near(1.0 / (lo * hi).sqrt());
            }
        }
        let mut lo = vec![f64::INFINITY; col.len()];
        let mut hi = vec![0.0f64; col.len()];
        for (i, c) in p.constraints.iter().enumerate() {
            for &(v, a) in &c.terms {
                let m = (a.as_f64() * row[i]).abs();
                if m > 0.0 {
                    lo[v.0] = lo[v.0].min(m);
                    hi[v.0] = hi[v.0].max(m);
                }
            }
        }
        for j in 0..col.len() {
            // binaries keep unit scale so integrality stays meaningful
            if p.variables[j].integrality == Integrality::Binary {
                col[j] = 1.0;
            } else if hi[j] > 0.0 {
                col[j] = pow2_near(1.0 / (lo[j] * hi[j]).sqrt());
            }
        }
    }
    Scaling { row, col }
}

struct Translated {
    problem: Problem,
    vars: Vec<microlp::Variable>,
    scaling: Scaling,
}

fn translate<T: Scalar>(p: &LpProblem<T>, opts: &SolverOptions) -> Translated {
    let scaling = if opts.equilibrate {
        equilibrate(p)
    } else {
        Scaling {
            row: vec![1.0; p.constraints.len()],
            col: vec![1.0; p.num_vars()],
        }
    };
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    if let Some(t) = opts.time_limit {
        lp.set_time_limit(t);
    }
    let vars: Vec<microlp::Variable> = p
        .variables
        .iter()
        .enumerate()
        .map(|(j, v)| {
            let s = scaling.col[j];
            // binaries are relaxed to [0,1]; branching fixes them
            lp.add_var(
                p.objective[j].as_f64() * s,
                (v.lower.as_f64() / s, v.upper.as_f64() / s),
            )
        })
        .collect();
    for (i, c) in p.constraints.iter().enumerate() {
        let r = scaling.row[i];
        let expr: Vec<(microlp::Variable, f64)> = c
            .terms
            .iter()
            .map(|&(v, a)| (vars[v.0], a.as_f64() * r * scaling.col[v.0]))
            .collect();
        let op = match c.relation {
            Relation::Le => ComparisonOp::Le,
            Relation::Ge => ComparisonOp::Ge,
            Relation::Eq => ComparisonOp::Eq,
        };
        lp.add_constraint(expr, op, c.rhs.as_f64() * r);
    }
    Translated {
        problem: lp,
        vars,
        scaling,
    }
}

fn extract<T: Scalar>(sol: &microlp::Solution, t: &Translated) -> Vec<T> {
    t.vars
        .iter()
        .zip(&t.scaling.col)
        .map(|(&v, &s)| T::of(sol.var_value(v) * s))
        .collect()
}

fn finish<T: Scalar>(p: &LpProblem<T>, status: SolveStatus, values: Vec<T>, mut stats: SolveStats) -> Solution<T> {
    let objective = p.objective_value(&values);
    stats.max_violation = p.max_violation(&values).as_f64();
    Solution {
        status,
        values,
        objective,
        stats,
    }
}

/// Solves a continuous LP.
///
/// Panics if `p` has binary variables; use [`solve_ilp`] for those.
pub fn solve_lp<T: Scalar>(p: &LpProblem<T>) -> Solution<T> {
    solve_lp_with(p, &SolverOptions::default())
}

pub fn solve_lp_with<T: Scalar>(p: &LpProblem<T>, opts: &SolverOptions) -> Solution<T> {
    assert!(!p.has_integers(), "solve_lp called on a problem with binary variables");
    let started = Instant::now();
    let t = translate(p, opts);
    let outcome = t.problem.solve();
    let mut stats = SolveStats::default();
    let result = match outcome {
        Ok(microlp::SolveOutcome::Solution(sol)) => {
            stats.iterations = sol.stats().lp_iterations;
            let values = extract(&sol, &t);
            stats.wall_time = started.elapsed();
            finish(p, SolveStatus::Optimal, values, stats)
        }
        Ok(microlp::SolveOutcome::Interrupted(i)) => {
            stats.iterations = i.stats().lp_iterations;
            stats.wall_time = started.elapsed();
            Solution::empty(SolveStatus::IterationLimit, stats)
        }
        Err(microlp::Error::Infeasible) => {
            stats.wall_time = started.elapsed();
            Solution::empty(SolveStatus::Infeasible, stats)
        }
        Err(microlp::Error::Unbounded) => {
            stats.wall_time = started.elapsed();
            Solution::empty(SolveStatus::Unbounded, stats)
        }
        Err(e) => {
            // numerical breakdown: retry once without scaling
            if opts.equilibrate {
                debug!("solver error {e}; retrying unscaled");
                let retry = SolverOptions {
                    equilibrate: false,
                    ..opts.clone()
                };
                return solve_lp_with(p, &retry);
            }
            stats.wall_time = started.elapsed();
            Solution::empty(SolveStatus::IterationLimit, stats)
        }
    };
    if opts.log {
        debug!(
            "lp {}: {:?} obj {} in {} pivots, {:?}",
            p.name,
            result.status,
            result.objective.as_f64(),
            result.stats.iterations,
            result.stats.wall_time
        );
    }
    result
}

/// Solves a program whose integer variables are all binary.
pub fn solve_ilp<T: Scalar>(p: &LpProblem<T>) -> Solution<T> {
    solve_ilp_with(p, &SolverOptions::default(), None)
}

/// Branch-and-bound with an optional feasible starting assignment.
///
/// An infeasible `incumbent` hint is ignored.
pub fn solve_ilp_with<T: Scalar>(p: &LpProblem<T>, opts: &SolverOptions, incumbent: Option<&[T]>) -> Solution<T> {
    let started = Instant::now();
    let deadline = opts.time_limit.map(|d| started + d);
    let binaries: Vec<usize> = (0..p.num_vars())
        .filter(|&j| p.variables[j].integrality == Integrality::Binary)
        .collect();
    let mut stats = SolveStats::default();
    let feas_tol = T::of(T::FEASIBILITY_TOL.max(opts.feasibility_tol) * 10.0);

    let mut best: Option<(Vec<T>, f64)> = incumbent
        .filter(|v| v.len() == p.num_vars())
        .filter(|v| p.max_violation(v) <= feas_tol * scale_of(p))
        .filter(|v| binaries.iter().all(|&j| is_integral(v[j].as_f64(), opts.integrality_tol)))
        .map(|v| (v.to_vec(), p.objective_value(v).as_f64()));
    if let Some((_, obj)) = &best {
        stats.incumbent_trace.push(*obj);
    }

    let t = translate(p, opts);
    let root = match t.problem.solve() {
        Ok(microlp::SolveOutcome::Solution(s)) => s,
        Ok(microlp::SolveOutcome::Interrupted(_)) => {
            stats.wall_time = started.elapsed();
            return match best {
                Some((v, _)) => finish(p, SolveStatus::IterationLimit, v, stats),
                None => Solution::empty(SolveStatus::IterationLimit, stats),
            };
        }
        Err(microlp::Error::Unbounded) => {
            stats.wall_time = started.elapsed();
            return Solution::empty(SolveStatus::Unbounded, stats);
        }
        Err(microlp::Error::Infeasible) => {
            stats.wall_time = started.elapsed();
            return Solution::empty(SolveStatus::Infeasible, stats);
        }
        Err(e) => {
            // numerical breakdown: retry unscaled, then fall back to the hint
            if opts.equilibrate {
                debug!("ilp root {}: {e}; retrying unscaled", p.name);
                let retry = SolverOptions {
                    equilibrate: false,
                    time_limit: deadline.map(|d| d.saturating_duration_since(Instant::now())),
                    ..opts.clone()
                };
                return solve_ilp_with(p, &retry, best.as_ref().map(|(v, _)| v.as_slice()));
            }
            stats.wall_time = started.elapsed();
            return match best {
                Some((v, _)) => finish(p, SolveStatus::IterationLimit, v, stats),
                None => Solution::empty(SolveStatus::IterationLimit, stats),
            };
        }
    };

    // objective values in the scaled problem equal the original ones
    let prunable = |bound: f64, best: &Option<(Vec<T>, f64)>| {
        best.as_ref()
            .is_some_and(|(_, inc)| bound >= inc - opts.absolute_gap - 1e-9 * inc.abs().max(1.0))
    };
    let mut stack = vec![root];
    let mut hit_limit = false;
    while let Some(node) = stack.pop() {
        if stats.nodes >= opts.node_limit || deadline.is_some_and(|d| Instant::now() >= d) {
            hit_limit = true;
            break;
        }
        stats.nodes += 1;
        stats.iterations = stats.iterations.max(node.stats().lp_iterations);
        if prunable(node.objective(), &best) {
            continue;
        }
        let values: Vec<f64> = t
            .vars
            .iter()
            .zip(&t.scaling.col)
            .map(|(&v, &s)| node.var_value(v) * s)
            .collect();
        let branch = binaries
            .iter()
            .copied()
            .filter(|&j| !is_integral(values[j], opts.integrality_tol))
            .max_by(|&a, &b| frac_dist(values[a]).total_cmp(&frac_dist(values[b])));
        match branch {
            None => {
                let mut v: Vec<T> = values.iter().map(|&x| T::of(x)).collect();
                for &j in &binaries {
                    v[j] = T::of(v[j].as_f64().round());
                }
                let obj = p.objective_value(&v).as_f64();
                if best.as_ref().is_none_or(|(_, inc)| obj < *inc) {
                    if opts.log {
                        debug!("ilp {}: incumbent {obj} at node {}", p.name, stats.nodes);
                    }
                    stats.incumbent_trace.push(obj);
                    best = Some((v, obj));
                }
            }
            Some(j) => {
                let x = values[j];
                let near = x.round();
                trace!("branch on {} = {x}", p.variables[j].name);
                // push the far child first so the rounded one is explored next
                for fixed in [1.0 - near, near] {
                    match node.clone().fix_var(t.vars[j], fixed / t.scaling.col[j]) {
                        Ok(microlp::SolveOutcome::Solution(child)) => {
                            if !prunable(child.objective(), &best) {
                                stack.push(child);
                            }
                        }
                        Ok(microlp::SolveOutcome::Interrupted(_)) => hit_limit = true,
                        Err(microlp::Error::Infeasible) => {}
                        // a child lost to numerics voids the optimality proof
                        Err(_) => hit_limit = true,
                    }
                }
            }
        }
    }
    stats.wall_time = started.elapsed();
    match best {
        Some((v, _)) => finish(
            p,
            if hit_limit {
                SolveStatus::NodeLimit
            } else {
                SolveStatus::Optimal
            },
            v,
            stats,
        ),
        None if hit_limit => Solution::empty(SolveStatus::NodeLimit, stats),
        None => Solution::empty(SolveStatus::Infeasible, stats),
    }
}

fn is_integral(x: f64, tol: f64) -> bool {
    (x - x.round()).abs() <= tol
}

fn frac_dist(x: f64) -> f64 {
    0.5 - (x - x.floor() - 0.5).abs()
}

/// Magnitude used to make feasibility checks relative.
fn scale_of<T: Scalar>(p: &LpProblem<T>) -> T {
    p.constraints
        .iter()
        .map(|c| c.rhs.abs())
        .fold(T::one(), T::max)
}

/// Dispatches to [`solve_lp_with`] or [`solve_ilp_with`].
pub fn solve<T: Scalar>(p: &LpProblem<T>, opts: &SolverOptions) -> Solution<T> {
    if p.has_integers() {
        solve_ilp_with(p, opts, None)
    } else {
        solve_lp_with(p, opts)
    }
}

/// Builds the LP dual of a continuous problem.
///
/// Finite variable bounds become explicit rows, so the dual has one
/// multiplier per row and per finite bound. Its optimal value, negated,
/// equals the primal optimum under strong duality.
pub fn dual_problem<T: Scalar>(p: &LpProblem<T>) -> LpProblem<T> {
    let mut d = LpProblem::new(format!("dual of {}", p.name));
    let n = p.num_vars();
    // column terms of A^T y = c
    let mut columns: Vec<Vec<(VarId, T)>> = vec![Vec::new(); n];
    let mut add_row = |d: &mut LpProblem<T>, name: String, terms: &[(VarId, T)], rel: Relation, rhs: T| {
        let y = match rel {
            Relation::Ge => d.add_nonneg_var(name),
            Relation::Le => d.add_var(name, T::neg_infinity(), T::zero()),
            Relation::Eq => d.add_free_var(name),
        };
        // maximise b'y == minimise -b'y
        d.add_objective(y, -rhs);
        for &(v, a) in terms {
            columns[v.0].push((y, a));
        }
    };
    for (i, c) in p.constraints.iter().enumerate() {
        add_row(&mut d, format!("y{i}"), &c.terms, c.relation, c.rhs);
    }
    for (j, v) in p.variables.iter().enumerate() {
        if v.lower.is_finite() {
            add_row(&mut d, format!("l{j}"), &[(VarId(j), T::one())], Relation::Ge, v.lower);
        }
        if v.upper.is_finite() {
            add_row(&mut d, format!("u{j}"), &[(VarId(j), T::one())], Relation::Le, v.upper);
        }
    }
    for (j, terms) in columns.into_iter().enumerate() {
        d.add_constraint(format!("c{j}"), terms, Relation::Eq, p.objective[j]);
    }
    d
}

/// Relative gap between the primal optimum and the optimum of its dual.
pub fn duality_gap<T: Scalar>(p: &LpProblem<T>, primal: &Solution<T>) -> Option<f64> {
    if primal.status != SolveStatus::Optimal {
        return None;
    }
    let dual = solve_lp(&dual_problem(p));
    if dual.status != SolveStatus::Optimal {
        return None;
    }
    let (a, b) = (primal.objective.as_f64(), -dual.objective.as_f64());
    Some((a - b).abs() / a.abs().max(b.abs()).max(1.0))
}
