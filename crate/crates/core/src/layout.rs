//! Square layouts: decoding solver output, validity checks, interpolation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Point, Rect};
use crate::lpmodel::BuiltModel;
use crate::mapdata::{AdjacencyGraph, SideLengthTable};
use crate::sepconstraints::{Axis, ConstraintKind, SeparationConstraintSet};
use crate::simplexsolver::{Solution, SolveStatus};
use crate::Scalar;

pub const SCHEMA_VERSION: u32 = 1;

/// One cartogram: a square per region.
#[derive(Clone, Debug, PartialEq)]
pub struct SquareLayout<T> {
    pub ids: Vec<String>,
    pub centers: Vec<Point<T>>,
    pub sides: Vec<T>,
    pub function_index: usize,
    /// Fingerprint of the separation constraints this layout satisfies.
    pub constraint_ref: u64,
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum Violation {
    #[error("{axis:?} separation {before} -> {after} short by {deficit}")]
    Separation {
        axis: Axis,
        before: String,
        after: String,
        deficit: f64,
    },
    #[error("squares {0} and {1} overlap")]
    Overlap(String, String),
    #[error("nonadjacent pair {before} -> {after} closer than the gap by {deficit}")]
    Gap { before: String, after: String, deficit: f64 },
}

#[derive(Debug, Error)]
pub enum LayoutError {
    #[error("solution status {0:?} is not optimal")]
    NotOptimal(SolveStatus),
    #[error("decoded layout is invalid: {0}")]
    Invalid(Violation),
    #[error("layouts reference different constraint sets or regions")]
    Mismatch,
    #[error("interpolation parameter {0} outside [0, 1]")]
    BadParameter(f64),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl<T: Scalar> SquareLayout<T> {
    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn square(&self, r: usize) -> Rect<T> {
        Rect::square(self.centers[r], self.sides[r])
    }

    pub fn bbox(&self) -> Rect<T> {
        (0..self.len())
            .map(|r| self.square(r))
            .reduce(|a, b| a.union(&b))
            .unwrap_or(Rect::new(Point::new(T::zero(), T::zero()), Point::new(T::zero(), T::zero())))
    }

    /// Shifts every square by `(dx, dy)`.
    pub fn translate(&mut self, dx: T, dy: T) {
        for c in &mut self.centers {
            c.x += dx;
            c.y += dy;
        }
    }

    /// Minimal L1 distance between the squares of `r1` and `r2`.
    pub fn l1_gap(&self, r1: usize, r2: usize) -> T {
        l1_gap_raw(self.centers[r1], self.sides[r1], self.centers[r2], self.sides[r2])
    }

    /// Checks separation, disjointness and gaps against `cs`.
    ///
    /// `tol` is an absolute slack; callers typically pass `1e-6 · Δ`.
    pub fn check(&self, cs: &SeparationConstraintSet<T>, tol: T) -> Result<(), Violation> {
        let half = T::half();
        for (axis, c) in cs.iter() {
            let (pa, pb) = (self.centers[c.before], self.centers[c.after]);
            let d = match axis {
                Axis::H => pb.x - pa.x,
                Axis::V => pb.y - pa.y,
            };
            let w = (self.sides[c.before] + self.sides[c.after]) * half;
            if d < w - tol {
                return Err(Violation::Separation {
                    axis,
                    before: self.ids[c.before].clone(),
                    after: self.ids[c.after].clone(),
                    deficit: (w - d).as_f64(),
                });
            }
            let gap = cs.gap(c);
            if c.kind == ConstraintKind::Primary && !c.adjacent && d < w + gap - tol {
                return Err(Violation::Gap {
                    before: self.ids[c.before].clone(),
                    after: self.ids[c.after].clone(),
                    deficit: (w + gap - d).as_f64(),
                });
            }
        }
        self.check_disjoint(tol)
    }

    /// Pairwise interior-disjointness only.
    pub fn check_disjoint(&self, tol: T) -> Result<(), Violation> {
        match self.overlapping_pairs(tol).first() {
            Some(&(a, b)) => Err(Violation::Overlap(self.ids[a].clone(), self.ids[b].clone())),
            None => Ok(()),
        }
    }

    pub fn overlapping_pairs(&self, tol: T) -> Vec<(usize, usize)> {
        let squares: Vec<Rect<T>> = (0..self.len()).map(|r| self.square(r)).collect();
        let mut out = Vec::new();
        for a in 0..squares.len() {
            for b in a + 1..squares.len() {
                if squares[a].interiors_intersect(&squares[b], tol) {
                    out.push((a, b));
                }
            }
        }
        out
    }

    /// Sum of pairwise overlap areas.
    pub fn overlap_area(&self) -> T {
        let mut total = T::zero();
        for a in 0..self.len() {
            for b in a + 1..self.len() {
                total += self.square(a).overlap_area(&self.square(b));
            }
        }
        total
    }
}

pub(crate) fn l1_gap_raw<T: Scalar>(c1: Point<T>, s1: T, c2: Point<T>, s2: T) -> T {
    let w = (s1 + s2) * T::half();
    let gx = ((c1.x - c2.x).abs() - w).max(T::zero());
    let gy = ((c1.y - c2.y).abs() - w).max(T::zero());
    gx + gy
}

/// Decodes and validates one layout per block of `model`.
pub fn decode<T: Scalar>(
    sol: &Solution<T>,
    model: &BuiltModel<T>,
    map: &AdjacencyGraph<T>,
    table: &SideLengthTable<T>,
    cs: &SeparationConstraintSet<T>,
) -> Result<Vec<SquareLayout<T>>, LayoutError> {
    let usable = sol.status == SolveStatus::Optimal
        || (sol.status == SolveStatus::NodeLimit && sol.has_point());
    if !usable {
        return Err(LayoutError::NotOptimal(sol.status));
    }
    let ids: Vec<String> = map.regions().iter().map(|r| r.id.clone()).collect();
    let tol = validity_tolerance(map);
    let mut layouts = Vec::with_capacity(model.blocks.len());
    for block in &model.blocks {
        let centers = block
            .x
            .iter()
            .zip(&block.y)
            .map(|(&x, &y)| Point::new(sol.value(x), sol.value(y)))
            .collect();
        let layout = SquareLayout {
            ids: ids.clone(),
            centers,
            sides: table.function(block.function_index).to_vec(),
            function_index: block.function_index,
            constraint_ref: cs.fingerprint(),
        };
        layout.check(cs, tol).map_err(LayoutError::Invalid)?;
        layouts.push(layout);
    }
    Ok(layouts)
}

/// Absolute slack for validity checks on layouts of `map`.
pub fn validity_tolerance<T: Scalar>(map: &AdjacencyGraph<T>) -> T {
    map.diagonal() * T::of(1e-6)
}

/// Jointly translates `layouts` so the first one's mean centre coincides
/// with the mean map origin. Used for translation-invariant objectives.
pub fn align_to_origins<T: Scalar>(layouts: &mut [SquareLayout<T>], map: &AdjacencyGraph<T>) {
    let Some(first) = layouts.first() else { return };
    let n = T::of(map.len() as f64);
    let (mut dx, mut dy) = (T::zero(), T::zero());
    for (c, o) in first.centers.iter().zip(map.origins()) {
        dx += o.x - c.x;
        dy += o.y - c.y;
    }
    let (dx, dy) = (dx / n, dy / n);
    for l in layouts {
        l.translate(dx, dy);
    }
}

/// Linear interpolation of centres and sides.
pub fn interpolate<T: Scalar>(a: &SquareLayout<T>, b: &SquareLayout<T>, t: T) -> Result<SquareLayout<T>, LayoutError> {
    if a.constraint_ref != b.constraint_ref || a.ids != b.ids {
        return Err(LayoutError::Mismatch);
    }
    if !(t >= T::zero() && t <= T::one()) {
        return Err(LayoutError::BadParameter(t.as_f64()));
    }
    let s = T::one() - t;
    Ok(SquareLayout {
        ids: a.ids.clone(),
        centers: a
            .centers
            .iter()
            .zip(&b.centers)
            .map(|(p, q)| Point::new(s * p.x + t * q.x, s * p.y + t * q.y))
            .collect(),
        sides: a.sides.iter().zip(&b.sides).map(|(&p, &q)| s * p + t * q).collect(),
        function_index: if t < T::half() { a.function_index } else { b.function_index },
        constraint_ref: a.constraint_ref,
    })
}

/// `n` evenly spaced interpolations from `a` (t = 0) to `b` (t = 1).
pub fn interpolation_frames<T: Scalar>(a: &SquareLayout<T>, b: &SquareLayout<T>, n: usize) -> Result<Vec<SquareLayout<T>>, LayoutError> {
    match n {
        0 => Ok(Vec::new()),
        1 => Ok(vec![interpolate(a, b, T::zero())?]),
        _ => (0..n)
            .map(|i| interpolate(a, b, T::of(i as f64 / (n - 1) as f64)))
            .collect(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionJson {
    pub id: String,
    pub cx: f64,
    pub cy: f64,
    pub side: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeaderJson {
    pub from: String,
    pub to: String,
    pub points: Vec<[f64; 2]>,
}

/// Interchange form of a layout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayoutJson {
    pub schema_version: u32,
    pub function: usize,
    #[serde(default)]
    pub function_name: Option<String>,
    pub constraint_ref: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    pub regions: Vec<RegionJson>,
    #[serde(default)]
    pub leaders: Vec<LeaderJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extra: Option<serde_json::Value>,
}

impl<T: Scalar> SquareLayout<T> {
    pub fn to_json(&self) -> LayoutJson {
        LayoutJson {
            schema_version: SCHEMA_VERSION,
            function: self.function_index,
            function_name: None,
            constraint_ref: format!("{:016x}", self.constraint_ref),
            method: None,
            regions: (0..self.len())
                .map(|r| RegionJson {
                    id: self.ids[r].clone(),
                    cx: self.centers[r].x.as_f64(),
                    cy: self.centers[r].y.as_f64(),
                    side: self.sides[r].as_f64(),
                })
                .collect(),
            leaders: Vec::new(),
            extra: None,
        }
    }

    pub fn from_json(doc: &LayoutJson) -> Result<Self, LayoutError> {
        let constraint_ref = u64::from_str_radix(&doc.constraint_ref, 16).map_err(|_| LayoutError::Mismatch)?;
        Ok(SquareLayout {
            ids: doc.regions.iter().map(|r| r.id.clone()).collect(),
            centers: doc.regions.iter().map(|r| Point::new(T::of(r.cx), T::of(r.cy))).collect(),
            sides: doc.regions.iter().map(|r| T::of(r.side)).collect(),
            function_index: doc.function,
            constraint_ref,
        })
    }
}
