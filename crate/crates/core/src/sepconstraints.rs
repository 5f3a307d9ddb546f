//! Horizontal / vertical separation constraints between region pairs.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashSet;
use std::fmt::Write as _;
use std::hash::{Hash, Hasher};

use thiserror::Error;

use crate::mapdata::AdjacencyGraph;
use crate::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Axis {
    /// Separated by a vertical line; `before` is left of `after`.
    H,
    /// Separated by a horizontal line; `before` is below `after`.
    V,
}

impl Axis {
    pub fn other(self) -> Axis {
        match self {
            Axis::H => Axis::V,
            Axis::V => Axis::H,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Setting {
    Weak,
    Strong,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ConstraintKind {
    Primary,
    Secondary,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SeparationConstraint {
    pub before: usize,
    pub after: usize,
    pub kind: ConstraintKind,
    /// Whether `{before, after}` is a map adjacency.
    pub adjacent: bool,
}

#[derive(Debug, Error, PartialEq)]
pub enum ConstraintError {
    #[error("regions {0} and {1} have coincident centroids")]
    CoincidentCentroids(usize, usize),
}

/// The directed sets `H` and `V` plus the gap they enforce.
#[derive(Clone, Debug)]
pub struct SeparationConstraintSet<T> {
    n: usize,
    h: Vec<SeparationConstraint>,
    v: Vec<SeparationConstraint>,
    pub epsilon: T,
    pub setting: Setting,
    h_pairs: HashSet<(usize, usize)>,
    v_pairs: HashSet<(usize, usize)>,
}

impl<T: Scalar> SeparationConstraintSet<T> {
    pub fn from_parts(
        n: usize,
        h: Vec<SeparationConstraint>,
        v: Vec<SeparationConstraint>,
        epsilon: T,
        setting: Setting,
    ) -> Self {
        let h_pairs = h.iter().map(|c| (c.before, c.after)).collect();
        let v_pairs = v.iter().map(|c| (c.before, c.after)).collect();
        SeparationConstraintSet {
            n,
            h,
            v,
            epsilon,
            setting,
            h_pairs,
            v_pairs,
        }
    }

    pub fn region_count(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> &[SeparationConstraint] {
        &self.h
    }

    pub fn v(&self) -> &[SeparationConstraint] {
        &self.v
    }

    pub fn axis(&self, axis: Axis) -> &[SeparationConstraint] {
        match axis {
            Axis::H => &self.h,
            Axis::V => &self.v,
        }
    }

    /// All constraints tagged with their axis.
    pub fn iter(&self) -> impl Iterator<Item = (Axis, &SeparationConstraint)> {
        self.h.iter().map(|c| (Axis::H, c)).chain(self.v.iter().map(|c| (Axis::V, c)))
    }

    pub fn len(&self) -> usize {
        self.h.len() + self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Whether `(a, b)` is in the given set (primary or secondary).
    pub fn contains(&self, axis: Axis, a: usize, b: usize) -> bool {
        match axis {
            Axis::H => self.h_pairs.contains(&(a, b)),
            Axis::V => self.v_pairs.contains(&(a, b)),
        }
    }

    /// Required clearance beyond touching for a constraint.
    pub fn gap(&self, c: &SeparationConstraint) -> T {
        if c.kind == ConstraintKind::Primary && !c.adjacent {
            self.epsilon
        } else {
            T::zero()
        }
    }

    /// The primary constraint between `a` and `b` in either orientation.
    pub fn primary_between(&self, a: usize, b: usize) -> Option<(Axis, SeparationConstraint)> {
        self.iter()
            .find(|(_, c)| {
                c.kind == ConstraintKind::Primary
                    && ((c.before == a && c.after == b) || (c.before == b && c.after == a))
            })
            .map(|(ax, c)| (ax, *c))
    }

    /// Stable identity used to check that layouts share constraints.
    pub fn fingerprint(&self) -> u64 {
        let mut hasher = DefaultHasher::new();
        self.n.hash(&mut hasher);
        self.setting.hash(&mut hasher);
        self.epsilon.as_f64().to_bits().hash(&mut hasher);
        let mut h = self.h.clone();
        let mut v = self.v.clone();
        let key = |c: &SeparationConstraint| (c.before, c.after, c.kind == ConstraintKind::Secondary);
        h.sort_by_key(key);
        v.sort_by_key(key);
        h.hash(&mut hasher);
        v.hash(&mut hasher);
        hasher.finish()
    }

    /// Directed graph of `H` (solid) and `V` (dashed) in DOT syntax.
    pub fn to_dot(&self, names: &[String]) -> String {
        let mut out = String::from("digraph separation {\n");
        for (i, name) in names.iter().enumerate() {
            let _ = writeln!(out, "  n{i} [label=\"{}\"];", name.replace('"', "\\\""));
        }
        for (axis, c) in self.iter() {
            let style = match (axis, c.kind) {
                (Axis::H, ConstraintKind::Primary) => "color=black",
                (Axis::H, ConstraintKind::Secondary) => "color=gray",
                (Axis::V, ConstraintKind::Primary) => "color=blue,style=dashed",
                (Axis::V, ConstraintKind::Secondary) => "color=lightblue,style=dashed",
            };
            let _ = writeln!(
                out,
                "  n{} -> n{} [{style},label=\"{:?}{}\"];",
                c.before,
                c.after,
                axis,
                if c.adjacent { "*" } else { "" }
            );
        }
        out.push_str("}\n");
        out
    }
}

/// Derives primary constraints for every region pair from centroid
/// geometry, plus secondary constraints in the strong setting.
pub fn derive_constraints<T: Scalar>(
    map: &AdjacencyGraph<T>,
    epsilon: T,
    setting: Setting,
) -> Result<SeparationConstraintSet<T>, ConstraintError> {
    let n = map.len();
    let boxes: Vec<_> = map.regions().iter().map(|r| r.bbox()).collect();
    let mut h = Vec::new();
    let mut v = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            let (ca, cb) = (map.region(a).centroid, map.region(b).centroid);
            let (dx, dy) = (cb.x - ca.x, cb.y - ca.y);
            if dx == T::zero() && dy == T::zero() {
                return Err(ConstraintError::CoincidentCentroids(a, b));
            }
            let adjacent = map.is_adjacent(a, b);
            let ordered = |d: T| if d > T::zero() { (a, b) } else { (b, a) };
            // ties go to H
            let primary_axis = if dx.abs() >= dy.abs() { Axis::H } else { Axis::V };
            let (before, after) = match primary_axis {
                Axis::H => ordered(dx),
                Axis::V => ordered(dy),
            };
            let c = SeparationConstraint {
                before,
                after,
                kind: ConstraintKind::Primary,
                adjacent,
            };
            match primary_axis {
                Axis::H => h.push(c),
                Axis::V => v.push(c),
            }
            if setting == Setting::Strong && !adjacent {
                let (ba, bb) = (&boxes[a], &boxes[b]);
                let x_sep = ba.max.x < bb.min.x || bb.max.x < ba.min.x;
                let y_sep = ba.max.y < bb.min.y || bb.max.y < ba.min.y;
                if x_sep && y_sep {
                    let other = primary_axis.other();
                    let (before, after) = match other {
                        Axis::H => ordered(dx),
                        Axis::V => ordered(dy),
                    };
                    let c = SeparationConstraint {
                        before,
                        after,
                        kind: ConstraintKind::Secondary,
                        adjacent,
                    };
                    match other {
                        Axis::H => h.push(c),
                        Axis::V => v.push(c),
                    }
                }
            }
        }
    }
    Ok(SeparationConstraintSet::from_parts(n, h, v, epsilon, setting))
}

/// Returns a directed cycle if the constraints cannot be realized: a cycle
/// among primary constraints of `H ∪ V`, or a cycle within `H` or within `V`
/// once secondary constraints are included. Secondary constraints may close
/// mixed-axis cycles (a region down and to the right of another is before
/// it in `V` and after it in `H`); those are harmless since the axes decouple.
pub fn validate_dag<T: Scalar>(cs: &SeparationConstraintSet<T>) -> Result<(), Vec<usize>> {
    let n = cs.region_count();
    let graph = |edges: &mut dyn Iterator<Item = &SeparationConstraint>| {
        let mut succ = vec![Vec::new(); n];
        for c in edges {
            succ[c.before].push(c.after);
        }
        succ
    };
    let primary = graph(&mut cs.iter().map(|(_, c)| c).filter(|c| c.kind == ConstraintKind::Primary));
    find_cycle(&primary)?;
    find_cycle(&graph(&mut cs.h.iter()))?;
    find_cycle(&graph(&mut cs.v.iter()))
}

fn find_cycle(succ: &[Vec<usize>]) -> Result<(), Vec<usize>> {
    let n = succ.len();
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Open,
        Done,
    }
    let mut mark = vec![Mark::New; n];
    let mut parent = vec![usize::MAX; n];
    for root in 0..n {
        if mark[root] != Mark::New {
            continue;
        }
        // explicit stack of (node, next successor index)
        let mut stack = vec![(root, 0usize)];
        mark[root] = Mark::Open;
        while let Some(&mut (u, ref mut next)) = stack.last_mut() {
            if *next < succ[u].len() {
                let w = succ[u][*next];
                *next += 1;
                match mark[w] {
                    Mark::New => {
                        mark[w] = Mark::Open;
                        parent[w] = u;
                        stack.push((w, 0));
                    }
                    Mark::Open => {
                        let mut cycle = vec![w];
                        let mut x = u;
                        while x != w {
                            cycle.push(x);
                            x = parent[x];
                        }
                        cycle[1..].reverse();
                        return Err(cycle);
                    }
                    Mark::Done => {}
                }
            } else {
                mark[u] = Mark::Done;
                stack.pop();
            }
        }
    }
    Ok(())
}

/// Drops non-adjacency constraints implied by a chain of at least two
/// constraints in the same set, each with a gap no smaller than the dropped
/// one. Adjacency constraints are always kept.
pub fn reduce_transitive<T: Scalar>(cs: &SeparationConstraintSet<T>) -> SeparationConstraintSet<T> {
    let reduce = |list: &[SeparationConstraint]| -> Vec<SeparationConstraint> {
        let n = cs.region_count();
        let mut succ: Vec<Vec<(usize, T)>> = vec![Vec::new(); n];
        for c in list {
            succ[c.before].push((c.after, cs.gap(c)));
        }
        list.iter()
            .filter(|c| c.adjacent || !implied_by_chain(&succ, c.before, c.after, cs.gap(c)))
            .copied()
            .collect()
    };
    SeparationConstraintSet::from_parts(
        cs.region_count(),
        reduce(&cs.h),
        reduce(&cs.v),
        cs.epsilon,
        cs.setting,
    )
}

/// Whether `to` is reachable from `from` by a path of length >= 2 whose
/// edges all have gap >= `gap`.
fn implied_by_chain<T: Scalar>(succ: &[Vec<(usize, T)>], from: usize, to: usize, gap: T) -> bool {
    let mut seen = vec![false; succ.len()];
    let mut stack: Vec<usize> = succ[from]
        .iter()
        .filter(|&&(w, g)| w != to && g >= gap)
        .map(|&(w, _)| w)
        .collect();
    while let Some(u) = stack.pop() {
        if seen[u] {
            continue;
        }
        seen[u] = true;
        for &(w, g) in &succ[u] {
            if g < gap {
                continue;
            }
            if w == to {
                return true;
            }
            if !seen[w] {
                stack.push(w);
            }
        }
    }
    false
}
