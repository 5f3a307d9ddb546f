//! Linear-program construction for single and multi-function cartograms.
//!
//! Every builder returns a [`BuiltModel`]: the solver-agnostic
//! [`LpProblem`] plus the variable handles needed to decode square centres.
//!
//! Per layout block the model contains
//! * free centre variables `x`, `y` per region,
//! * one separation row per constraint, `pos(after) - pos(before) >= w + gap`,
//! * for map adjacencies, nonnegative distances `h`, `v` bounded below by the
//!   positive part of the centre offset minus the half-side sum (with `ε`
//!   added on the axis parallel to the separating line, so that a bare
//!   corner contact is not counted as touching),
//! * a directional-deviation variable per region pair measuring how far the
//!   pair drifts from the ray between its map centroids.

mod problem;

pub use problem::{Integrality, LinearConstraint, LpProblem, Relation, VarId, Variable};

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::geometry::Point;
use crate::mapdata::{AdjacencyGraph, SideLengthTable};
use crate::sepconstraints::{Axis, SeparationConstraintSet};
use crate::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Objective {
    /// Total L1 distance between squares of adjacent regions.
    Top,
    /// Total L1 displacement of squares from their map origins.
    Org,
    /// Number of lost adjacencies (binary program).
    Cnt,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Stability {
    /// Couple every pair of functions.
    Co,
    /// Couple consecutive functions.
    Su,
    /// Solve one function at a time against the previous solution.
    It,
    /// Couple every function to the first one.
    Central,
    None,
}

impl FromStr for Objective {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "TOP" => Ok(Objective::Top),
            "ORG" => Ok(Objective::Org),
            "CNT" => Ok(Objective::Cnt),
            other => Err(format!("unknown objective {other:?}")),
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Objective::Top => "TOP",
            Objective::Org => "ORG",
            Objective::Cnt => "CNT",
        })
    }
}

impl FromStr for Stability {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "CO" => Ok(Stability::Co),
            "SU" => Ok(Stability::Su),
            "IT" => Ok(Stability::It),
            "CENTRAL" | "CE" => Ok(Stability::Central),
            "NONE" => Ok(Stability::None),
            other => Err(format!("unknown stability implementation {other:?}")),
        }
    }
}

impl fmt::Display for Stability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stability::Co => "CO",
            Stability::Su => "SU",
            Stability::It => "IT",
            Stability::Central => "CENTRAL",
            Stability::None => "NONE",
        })
    }
}

/// Objective and weighting choices for a model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelSpec<T> {
    pub objective: Objective,
    pub stability: Stability,
    /// Multiplier of the directional-deviation term. It must stay small
    /// enough that the secondary term never outweighs a primary increment.
    pub secondary_weight: T,
    /// Extra factor on the directional term for adjacent pairs.
    pub adjacent_direction_boost: T,
    /// Weight `λ` of inter-layout displacement terms.
    pub stability_weight: T,
}

impl<T: Scalar> ModelSpec<T> {
    pub fn new(objective: Objective, stability: Stability) -> Self {
        ModelSpec {
            objective,
            stability,
            secondary_weight: T::of(1e-3),
            adjacent_direction_boost: T::of(10.0),
            stability_weight: T::one(),
        }
    }

    /// Multiplier applied to every continuous objective term. Counting
    /// lost adjacencies makes all distance terms tie-breakers: dividing by
    /// the big-M bound keeps their total below one lost edge.
    fn continuous_scale(&self, big_m: T) -> T {
        match self.objective {
            Objective::Cnt => self.secondary_weight / big_m,
            _ => T::one(),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("CNT needs the integer builder")]
    CntNeedsInteger,
    #[error("stability implementation {got} not accepted here (expected {expected})")]
    WrongStability { got: Stability, expected: &'static str },
    #[error("side table has {got} regions, map has {expected}")]
    SizeMismatch { got: usize, expected: usize },
    #[error("constraint set covers {got} regions, map has {expected}")]
    ConstraintSizeMismatch { got: usize, expected: usize },
    #[error("iterative step {0} needs the previous solution")]
    MissingPrevious(usize),
    #[error("iterative step {0} out of range")]
    StepOutOfRange(usize),
}

/// Variables of one adjacency within a block.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeVars {
    pub a: usize,
    pub b: usize,
    pub h: VarId,
    pub v: VarId,
    /// Lost-adjacency indicator, present in CNT models only.
    pub lost: Option<VarId>,
}

/// Variables realising the layout of one weight function.
#[derive(Clone, Debug, PartialEq)]
pub struct LayoutBlock {
    pub function_index: usize,
    pub x: Vec<VarId>,
    pub y: Vec<VarId>,
    pub edges: Vec<EdgeVars>,
}

#[derive(Clone, Debug)]
pub struct BuiltModel<T> {
    pub problem: LpProblem<T>,
    pub blocks: Vec<LayoutBlock>,
    /// Fingerprint of the separation constraints the model enforces.
    pub constraint_ref: u64,
    /// False when the objective is invariant under translation, in which
    /// case decoded layouts should be re-anchored to the map.
    pub anchored: bool,
    /// Function index pairs coupled by displacement terms.
    pub coupled: Vec<(usize, usize)>,
}

fn check_sizes<T: Scalar>(map: &AdjacencyGraph<T>, sides: usize, cs: &SeparationConstraintSet<T>) -> Result<(), ModelError> {
    if sides != map.len() {
        return Err(ModelError::SizeMismatch {
            got: sides,
            expected: map.len(),
        });
    }
    if cs.region_count() != map.len() {
        return Err(ModelError::ConstraintSizeMismatch {
            got: cs.region_count(),
            expected: map.len(),
        });
    }
    Ok(())
}

fn add_block<T: Scalar>(
    p: &mut LpProblem<T>,
    map: &AdjacencyGraph<T>,
    sides: &[T],
    cs: &SeparationConstraintSet<T>,
    spec: &ModelSpec<T>,
    fi: usize,
    scale: T,
) -> LayoutBlock {
    let n = map.len();
    let half = T::half();
    let x: Vec<VarId> = (0..n).map(|r| p.add_free_var(format!("x{fi}_{r}"))).collect();
    let y: Vec<VarId> = (0..n).map(|r| p.add_free_var(format!("y{fi}_{r}"))).collect();
    let pos = |axis: Axis, r: usize| match axis {
        Axis::H => x[r],
        Axis::V => y[r],
    };

    for (axis, c) in cs.iter() {
        let w = (sides[c.before] + sides[c.after]) * half;
        let tag = match axis {
            Axis::H => "sh",
            Axis::V => "sv",
        };
        p.add_constraint(
            format!("{tag}{fi}_{}_{}", c.before, c.after),
            vec![(pos(axis, c.after), T::one()), (pos(axis, c.before), -T::one())],
            Relation::Ge,
            w + cs.gap(c),
        );
    }

    let mut edges = Vec::new();
    if matches!(spec.objective, Objective::Top | Objective::Cnt) {
        for (a, b) in map.edges() {
            let w = (sides[a] + sides[b]) * half;
            let h = p.add_nonneg_var(format!("h{fi}_{a}_{b}"));
            let v = p.add_nonneg_var(format!("v{fi}_{a}_{b}"));
            p.add_objective(h, scale);
            p.add_objective(v, scale);
            // the axis parallel to the separating line needs ε of overlap
            let sep_axis = cs
                .primary_between(a, b)
                .map(|(ax, _)| ax)
                .unwrap_or_else(|| centroid_axis(map, a, b));
            let (eps_h, eps_v) = match sep_axis {
                Axis::V => (cs.epsilon, T::zero()),
                Axis::H => (T::zero(), cs.epsilon),
            };
            for (var, axis, eps, tag) in [(h, Axis::H, eps_h, "mh"), (v, Axis::V, eps_v, "mv")] {
                let (pa, pb) = (pos(axis, a), pos(axis, b));
                p.add_constraint(
                    format!("{tag}{fi}_{a}_{b}p"),
                    vec![(var, T::one()), (pa, -T::one()), (pb, T::one())],
                    Relation::Ge,
                    eps - w,
                );
                p.add_constraint(
                    format!("{tag}{fi}_{a}_{b}n"),
                    vec![(var, T::one()), (pa, T::one()), (pb, -T::one())],
                    Relation::Ge,
                    eps - w,
                );
            }
            edges.push(EdgeVars { a, b, h, v, lost: None });
        }
    }

    if spec.objective == Objective::Org {
        for r in 0..n {
            let o = map.region(r).origin();
            for (var, target, tag) in [(x[r], o.x, "ox"), (y[r], o.y, "oy")] {
                let plus = p.add_nonneg_var(format!("{tag}{fi}_{r}p"));
                let minus = p.add_nonneg_var(format!("{tag}{fi}_{r}n"));
                p.add_objective(plus, scale);
                p.add_objective(minus, scale);
                p.add_constraint(
                    format!("{tag}{fi}_{r}"),
                    vec![(var, T::one()), (plus, -T::one()), (minus, T::one())],
                    Relation::Eq,
                    target,
                );
            }
        }
    }

    // directional deviation for every pair, measured across the primary axis
    for a in 0..n {
        for b in a + 1..n {
            let (ca, cb) = (map.region(a).centroid, map.region(b).centroid);
            let (dx, dy) = (cb.x - ca.x, cb.y - ca.y);
            if dx == T::zero() && dy == T::zero() {
                continue;
            }
            let weight = scale
                * spec.secondary_weight
                * if map.is_adjacent(a, b) {
                    spec.adjacent_direction_boost
                } else {
                    T::one()
                };
            let d = p.add_nonneg_var(format!("d{fi}_{a}_{b}"));
            p.add_objective(d, weight);
            // expr = (q_a + slope (p_b - p_a)) - q_b along the axis pair
            let (along, across, slope) = if dx.abs() >= dy.abs() {
                (&x, &y, dy / dx)
            } else {
                (&y, &x, dx / dy)
            };
            let expr = [
                (across[a], T::one()),
                (along[a], -slope),
                (along[b], slope),
                (across[b], -T::one()),
            ];
            let mut pos_row = vec![(d, T::one())];
            pos_row.extend(expr.iter().map(|&(v, c)| (v, -c)));
            let mut neg_row = vec![(d, T::one())];
            neg_row.extend(expr.iter().copied());
            p.add_constraint(format!("dd{fi}_{a}_{b}p"), pos_row, Relation::Ge, T::zero());
            p.add_constraint(format!("dd{fi}_{a}_{b}n"), neg_row, Relation::Ge, T::zero());
        }
    }

    LayoutBlock {
        function_index: fi,
        x,
        y,
        edges,
    }
}

fn centroid_axis<T: Scalar>(map: &AdjacencyGraph<T>, a: usize, b: usize) -> Axis {
    let (ca, cb) = (map.region(a).centroid, map.region(b).centroid);
    if (cb.x - ca.x).abs() >= (cb.y - ca.y).abs() {
        Axis::H
    } else {
        Axis::V
    }
}

/// Upper bound on `h + v` for any edge of a valid layout.
fn big_m<T: Scalar>(sides: &[T], epsilon: T) -> T {
    let n = T::of(sides.len() as f64);
    T::two() * (sides.iter().copied().sum::<T>() + n * epsilon)
}

/// Adds lost-adjacency binaries with big-M links `h + v <= M b`.
fn add_lost_indicators<T: Scalar>(
    p: &mut LpProblem<T>,
    block: &mut LayoutBlock,
    sides: &[T],
    cs: &SeparationConstraintSet<T>,
) {
    let big_m = big_m(sides, cs.epsilon);
    let fi = block.function_index;
    for e in &mut block.edges {
        let b = p.add_binary_var(format!("b{fi}_{}_{}", e.a, e.b));
        p.add_objective(b, T::one());
        p.add_constraint(
            format!("lk{fi}_{}_{}", e.a, e.b),
            vec![(e.h, T::one()), (e.v, T::one()), (b, -big_m)],
            Relation::Le,
            T::zero(),
        );
        e.lost = Some(b);
    }
}

/// Adds `|pos - target|` per region and axis with weight `weight`.
fn add_anchor_terms<T: Scalar>(p: &mut LpProblem<T>, block: &LayoutBlock, targets: &[Point<T>], weight: T) {
    let fi = block.function_index;
    for (r, t) in targets.iter().enumerate() {
        for (var, target, tag) in [(block.x[r], t.x, "ax"), (block.y[r], t.y, "ay")] {
            let c = p.add_nonneg_var(format!("{tag}{fi}_{r}"));
            p.add_objective(c, weight);
            p.add_constraint(
                format!("{tag}{fi}_{r}p"),
                vec![(c, T::one()), (var, -T::one())],
                Relation::Ge,
                -target,
            );
            p.add_constraint(
                format!("{tag}{fi}_{r}n"),
                vec![(c, T::one()), (var, T::one())],
                Relation::Ge,
                target,
            );
        }
    }
}

fn header<T: Scalar>(p: &mut LpProblem<T>, map: &AdjacencyGraph<T>, spec: &ModelSpec<T>, cs: &SeparationConstraintSet<T>) {
    p.comments.push(format!(
        "objective {} stability {} setting {:?} epsilon {}",
        spec.objective,
        spec.stability,
        cs.setting,
        cs.epsilon.as_f64()
    ));
    for (i, r) in map.regions().iter().enumerate() {
        p.comments.push(format!("region {i} = {}", r.id));
    }
}

/// LP for one weight function (TOP or ORG objective).
pub fn build_single_lp<T: Scalar>(
    map: &AdjacencyGraph<T>,
    sides: &[T],
    cs: &SeparationConstraintSet<T>,
    spec: &ModelSpec<T>,
) -> Result<BuiltModel<T>, ModelError> {
    if spec.objective == Objective::Cnt {
        return Err(ModelError::CntNeedsInteger);
    }
    single(map, sides, 0, cs, spec)
}

fn single<T: Scalar>(
    map: &AdjacencyGraph<T>,
    sides: &[T],
    fi: usize,
    cs: &SeparationConstraintSet<T>,
    spec: &ModelSpec<T>,
) -> Result<BuiltModel<T>, ModelError> {
    check_sizes(map, sides.len(), cs)?;
    let mut p = LpProblem::new(format!("demers {} single", spec.objective));
    header(&mut p, map, spec, cs);
    let scale = spec.continuous_scale(big_m(sides, cs.epsilon));
    let mut block = add_block(&mut p, map, sides, cs, spec, fi, scale);
    if spec.objective == Objective::Cnt {
        add_lost_indicators(&mut p, &mut block, sides, cs);
    }
    Ok(BuiltModel {
        problem: p,
        blocks: vec![block],
        constraint_ref: cs.fingerprint(),
        anchored: spec.objective == Objective::Org,
        coupled: Vec::new(),
    })
}

/// Binary program counting lost adjacencies, with the TOP distance as a
/// tie-breaker.
pub fn build_cnt_ilp<T: Scalar>(
    map: &AdjacencyGraph<T>,
    sides: &[T],
    cs: &SeparationConstraintSet<T>,
    spec: &ModelSpec<T>,
) -> Result<BuiltModel<T>, ModelError> {
    let spec = ModelSpec {
        objective: Objective::Cnt,
        ..*spec
    };
    single(map, sides, 0, cs, &spec)
}

/// Function index pairs whose layouts are coupled.
pub fn coupling_pairs(stability: Stability, k: usize) -> Vec<(usize, usize)> {
    match stability {
        Stability::Co => (0..k).flat_map(|i| (i + 1..k).map(move |j| (i, j))).collect(),
        Stability::Su => (1..k).map(|i| (i - 1, i)).collect(),
        Stability::Central => (1..k).map(|i| (0, i)).collect(),
        Stability::It | Stability::None => Vec::new(),
    }
}

/// One program holding a layout per weight function, coupled by
/// displacement terms between the function pairs selected by
/// `spec.stability`.
pub fn build_multi_lp<T: Scalar>(
    map: &AdjacencyGraph<T>,
    table: &SideLengthTable<T>,
    cs: &SeparationConstraintSet<T>,
    spec: &ModelSpec<T>,
) -> Result<BuiltModel<T>, ModelError> {
    if !matches!(spec.stability, Stability::Co | Stability::Su | Stability::Central) {
        return Err(ModelError::WrongStability {
            got: spec.stability,
            expected: "CO, SU or CENTRAL",
        });
    }
    let k = table.k();
    if k == 1 {
        return single(map, table.function(0), 0, cs, spec);
    }
    check_sizes(map, table.function(0).len(), cs)?;
    let mut p = LpProblem::new(format!("demers {}-{} multi k={k}", spec.objective, spec.stability));
    header(&mut p, map, spec, cs);
    let m = (0..k)
        .map(|fi| big_m(table.function(fi), cs.epsilon))
        .fold(T::zero(), T::max);
    let scale = spec.continuous_scale(m);
    let mut blocks = Vec::with_capacity(k);
    for fi in 0..k {
        let mut block = add_block(&mut p, map, table.function(fi), cs, spec, fi, scale);
        if spec.objective == Objective::Cnt {
            add_lost_indicators(&mut p, &mut block, table.function(fi), cs);
        }
        blocks.push(block);
    }
    let coupled = coupling_pairs(spec.stability, k);
    let weight = spec.stability_weight * scale;
    for &(i, j) in &coupled {
        for r in 0..map.len() {
            for (vi, vj, tag) in [(blocks[i].x[r], blocks[j].x[r], "c"), (blocks[i].y[r], blocks[j].y[r], "e")] {
                let c = p.add_nonneg_var(format!("{tag}{i}_{j}_{r}"));
                p.add_objective(c, weight);
                p.add_constraint(
                    format!("{tag}{i}_{j}_{r}p"),
                    vec![(c, T::one()), (vi, -T::one()), (vj, T::one())],
                    Relation::Ge,
                    T::zero(),
                );
                p.add_constraint(
                    format!("{tag}{i}_{j}_{r}n"),
                    vec![(c, T::one()), (vi, T::one()), (vj, -T::one())],
                    Relation::Ge,
                    T::zero(),
                );
            }
        }
    }
    Ok(BuiltModel {
        problem: p,
        blocks,
        constraint_ref: cs.fingerprint(),
        anchored: spec.objective == Objective::Org,
        coupled,
    })
}

/// Lazily built sequence of per-function programs; step `i >= 1` pulls
/// toward the solved centres of step `i - 1`, step 0 toward map origins.
#[derive(Clone, Copy, Debug)]
pub struct IterativeSequence<'a, T> {
    map: &'a AdjacencyGraph<T>,
    table: &'a SideLengthTable<T>,
    cs: &'a SeparationConstraintSet<T>,
    spec: ModelSpec<T>,
}

pub fn build_iterative_sequence<'a, T: Scalar>(
    map: &'a AdjacencyGraph<T>,
    table: &'a SideLengthTable<T>,
    cs: &'a SeparationConstraintSet<T>,
    spec: &ModelSpec<T>,
) -> Result<IterativeSequence<'a, T>, ModelError> {
    if spec.stability != Stability::It {
        return Err(ModelError::WrongStability {
            got: spec.stability,
            expected: "IT",
        });
    }
    check_sizes(map, table.function(0).len(), cs)?;
    Ok(IterativeSequence {
        map,
        table,
        cs,
        spec: *spec,
    })
}

impl<'a, T: Scalar> IterativeSequence<'a, T> {
    pub fn len(&self) -> usize {
        self.table.k()
    }

    pub fn is_empty(&self) -> bool {
        self.table.k() == 0
    }

    /// Program for function `step`, given the centres solved at `step - 1`.
    pub fn step(&self, step: usize, previous: Option<&[Point<T>]>) -> Result<BuiltModel<T>, ModelError> {
        if step >= self.len() {
            return Err(ModelError::StepOutOfRange(step));
        }
        let sides = self.table.function(step);
        let mut model = single(self.map, sides, step, self.cs, &self.spec)?;
        model.problem.name = format!("demers {}-IT step {step}", self.spec.objective);
        let weight = self.spec.stability_weight * self.spec.continuous_scale(big_m(sides, self.cs.epsilon));
        if step == 0 {
            if self.spec.objective != Objective::Org {
                let origins = self.map.origins();
                add_anchor_terms(&mut model.problem, &model.blocks[0], &origins, weight);
            }
        } else {
            let prev = previous.ok_or(ModelError::MissingPrevious(step))?;
            if prev.len() != self.map.len() {
                return Err(ModelError::SizeMismatch {
                    got: prev.len(),
                    expected: self.map.len(),
                });
            }
            add_anchor_terms(&mut model.problem, &model.blocks[0], prev, weight);
        }
        model.anchored = true;
        Ok(model)
    }
}
