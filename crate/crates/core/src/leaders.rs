//! Orthogonal leaders connecting the squares of lost adjacencies.
//!
//! Every pair is first mapped into a normalised frame where the pair is
//! horizontally separated and the second square lies up and to the right
//! (transposing for vertical pairs, mirroring `y` when needed). The
//! constructions then only deal with that one orientation:
//!
//! * projections overlap: one straight segment through the middle of the
//!   shared strip;
//! * otherwise a monotone staircase from the top-right corner of the first
//!   square to the bottom-left corner of the second, hugging the
//!   bottom-right corners of the squares that lie above the first and left
//!   of the second.
//!
//! Every candidate is checked geometrically. If a construction fails the
//! check, a bend-minimal monotone route on the grid spanned by square edges
//! is used instead, and if none exists the edge is reported as unroutable.

use serde::Serialize;
use thiserror::Error;

use crate::geometry::{Point, Rect};
use crate::layout::{LeaderJson, SquareLayout};
use crate::mapdata::AdjacencyGraph;
use crate::sepconstraints::{Axis, SeparationConstraintSet, Setting};
use crate::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Construction {
    Straight,
    Staircase,
    TwoBend,
    /// Bend-minimal route found by grid search.
    GridSearch,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Leader<T> {
    pub from: usize,
    pub to: usize,
    pub points: Vec<Point<T>>,
    pub length: T,
    pub bends: usize,
    pub construction: Construction,
}

impl<T: Scalar> Leader<T> {
    fn new(from: usize, to: usize, points: Vec<Point<T>>, construction: Construction) -> Self {
        let points = simplify(points);
        let length = points.windows(2).map(|w| w[0].l1(&w[1])).sum();
        let bends = points.len().saturating_sub(2);
        Leader {
            from,
            to,
            points,
            length,
            bends,
            construction,
        }
    }

    pub fn to_json(&self, ids: &[String]) -> LeaderJson {
        LeaderJson {
            from: ids[self.from].clone(),
            to: ids[self.to].clone(),
            points: self.points.iter().map(|p| [p.x.as_f64(), p.y.as_f64()]).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum LeaderError {
    #[error("squares touch; nothing to route")]
    Intact,
    #[error("no primary constraint between the pair")]
    NoConstraint,
    #[error("pair is not minimal: region {0} lies between")]
    NotMinimal(usize),
    #[error("two-bend routing needs the strong setting")]
    WeakSetting,
    #[error("no monotone route avoids the other squares")]
    NoRoute,
}

/// Drops repeated points and merges collinear runs.
fn simplify<T: Scalar>(points: Vec<Point<T>>) -> Vec<Point<T>> {
    let mut out: Vec<Point<T>> = Vec::with_capacity(points.len());
    for p in points {
        if out.last() == Some(&p) {
            continue;
        }
        if out.len() >= 2 {
            let (a, b) = (out[out.len() - 2], out[out.len() - 1]);
            if (a.x == b.x && b.x == p.x) || (a.y == b.y && b.y == p.y) {
                out.pop();
            }
        }
        out.push(p);
    }
    out
}

/// Maps the layout into the frame where the pair is left/right separated
/// and the target is not below the source.
#[derive(Clone, Copy, Debug)]
struct Frame {
    transpose: bool,
    mirror: bool,
}

impl Frame {
    fn fwd<T: Scalar>(&self, p: Point<T>) -> Point<T> {
        let (x, y) = if self.transpose { (p.y, p.x) } else { (p.x, p.y) };
        Point::new(x, if self.mirror { -y } else { y })
    }

    fn back<T: Scalar>(&self, p: Point<T>) -> Point<T> {
        let (x, y) = (p.x, if self.mirror { -p.y } else { p.y });
        if self.transpose {
            Point::new(y, x)
        } else {
            Point::new(x, y)
        }
    }

    fn rect<T: Scalar>(&self, r: &Rect<T>) -> Rect<T> {
        let (a, b) = (self.fwd(r.min), self.fwd(r.max));
        Rect::new(
            Point::new(a.x.min(b.x), a.y.min(b.y)),
            Point::new(a.x.max(b.x), a.y.max(b.y)),
        )
    }

    /// Index of the presort that orders squares by normalised bottom edge.
    fn sort_key(&self) -> usize {
        (self.transpose as usize) * 2 + self.mirror as usize
    }
}

/// Squares ordered by bottom, top (descending), left and right
/// (descending) edge: the normalised bottom edge for each of the four frames.
struct Presorted {
    orders: [Vec<usize>; 4],
}

impl Presorted {
    fn new<T: Scalar>(squares: &[Rect<T>]) -> Self {
        let sorted = |key: &dyn Fn(&Rect<T>) -> T| {
            let mut idx: Vec<usize> = (0..squares.len()).collect();
            idx.sort_by(|&a, &b| key(&squares[a]).partial_cmp(&key(&squares[b])).unwrap().then(a.cmp(&b)));
            idx
        };
        Presorted {
            orders: [
                sorted(&|r| r.min.y),
                sorted(&|r| -r.max.y),
                sorted(&|r| r.min.x),
                sorted(&|r| -r.max.x),
            ],
        }
    }
}

/// Shared per-layout routing state.
struct Router<'a, T> {
    layout: &'a SquareLayout<T>,
    cs: &'a SeparationConstraintSet<T>,
    squares: Vec<Rect<T>>,
    sorted: Presorted,
    tol: T,
}

/// The normalised instance for one pair.
struct Oriented<T> {
    frame: Frame,
    source: usize,
    target: usize,
    a: Rect<T>,
    b: Rect<T>,
}

impl<'a, T: Scalar> Router<'a, T> {
    fn new(layout: &'a SquareLayout<T>, cs: &'a SeparationConstraintSet<T>) -> Self {
        let squares: Vec<Rect<T>> = (0..layout.len()).map(|r| layout.square(r)).collect();
        let extent = layout.bbox();
        let tol = (extent.width() + extent.height()).max(T::one()) * T::of(1e-9);
        let sorted = Presorted::new(&squares);
        Router {
            layout,
            cs,
            squares,
            sorted,
            tol,
        }
    }

    fn orient(&self, r1: usize, r2: usize) -> Result<Oriented<T>, LeaderError> {
        if self.layout.l1_gap(r1, r2) <= self.tol {
            return Err(LeaderError::Intact);
        }
        let (axis, c) = self.cs.primary_between(r1, r2).ok_or(LeaderError::NoConstraint)?;
        let (source, target) = (c.before, c.after);
        for r in 0..self.layout.len() {
            if r != source && r != target && self.cs.contains(axis, source, r) && self.cs.contains(axis, r, target) {
                return Err(LeaderError::NotMinimal(r));
            }
        }
        let transpose = axis == Axis::V;
        let probe = Frame { transpose, mirror: false };
        let (ca, cb) = (probe.fwd(self.layout.centers[source]), probe.fwd(self.layout.centers[target]));
        let frame = Frame {
            transpose,
            mirror: cb.y < ca.y,
        };
        Ok(Oriented {
            frame,
            source,
            target,
            a: frame.rect(&self.squares[source]),
            b: frame.rect(&self.squares[target]),
        })
    }

    fn finish(&self, o: &Oriented<T>, pts: Vec<Point<T>>, how: Construction) -> Leader<T> {
        let pts = pts.into_iter().map(|p| o.frame.back(p)).collect();
        Leader::new(o.source, o.target, pts, how)
    }

    /// Squares other than the pair itself, in the normalised frame, ordered
    /// by bottom edge.
    fn others_by_bottom<'s>(&'s self, o: &'s Oriented<T>) -> impl Iterator<Item = Rect<T>> + 's {
        self.sorted.orders[o.frame.sort_key()]
            .iter()
            .filter(move |&&r| r != o.source && r != o.target)
            .map(move |&r| o.frame.rect(&self.squares[r]))
    }

    fn straight(&self, o: &Oriented<T>) -> Option<Vec<Point<T>>> {
        let lo = o.a.min.y.max(o.b.min.y);
        let hi = o.a.max.y.min(o.b.max.y);
        if hi + self.tol < lo {
            return None;
        }
        let y = (lo + hi) * T::half();
        Some(vec![Point::new(o.a.max.x, y), Point::new(o.b.min.x, y)])
    }

    fn corners(&self, o: &Oriented<T>) -> (Point<T>, Point<T>) {
        (Point::new(o.a.max.x, o.a.max.y), Point::new(o.b.min.x, o.b.min.y))
    }

    /// Upper-left blockers: above the source's top, left of the target's
    /// left edge, reaching into the corridor.
    fn is_upper_blocker(&self, r: &Rect<T>, s: Point<T>, t: Point<T>) -> bool {
        r.min.y >= s.y - self.tol && r.max.x <= t.x + self.tol && r.max.x > s.x + self.tol && r.min.y < t.y - self.tol
    }

    fn is_lower_blocker(&self, r: &Rect<T>, s: Point<T>, t: Point<T>) -> bool {
        r.min.x >= s.x - self.tol && r.max.y <= t.y + self.tol && r.max.y > s.y + self.tol && r.min.x < t.x - self.tol
    }

    fn staircase(&self, o: &Oriented<T>) -> Vec<Point<T>> {
        let (s, t) = self.corners(o);
        let mut cur = s;
        let mut pts = vec![s];
        for r in self.others_by_bottom(o) {
            if !self.is_upper_blocker(&r, s, t) || r.max.x <= cur.x + self.tol {
                continue;
            }
            let q = r.min.y.max(cur.y);
            pts.push(Point::new(cur.x, q));
            cur = Point::new(r.max.x.min(t.x), q);
            pts.push(cur);
        }
        pts.push(Point::new(cur.x, t.y));
        pts.push(t);
        pts
    }

    /// Up, across, up; or right, up, right when no horizontal corridor
    /// exists.
    fn two_bend_candidates(&self, o: &Oriented<T>) -> Vec<Vec<Point<T>>> {
        let (s, t) = self.corners(o);
        let (mut min_upper_bottom, mut max_lower_top) = (t.y, s.y);
        let (mut max_upper_right, mut min_lower_left) = (s.x, t.x);
        for r in self.others_by_bottom(o) {
            if self.is_upper_blocker(&r, s, t) {
                min_upper_bottom = min_upper_bottom.min(r.min.y);
                max_upper_right = max_upper_right.max(r.max.x);
            }
            if self.is_lower_blocker(&r, s, t) {
                max_lower_top = max_lower_top.max(r.max.y);
                min_lower_left = min_lower_left.min(r.min.x);
            }
        }
        let mut out = Vec::new();
        if max_lower_top <= min_upper_bottom + self.tol {
            let y = min_upper_bottom.max(s.y).min(t.y);
            out.push(vec![s, Point::new(s.x, y), Point::new(t.x, y), t]);
        }
        if max_upper_right <= min_lower_left + self.tol {
            let x = max_upper_right.max(s.x).min(t.x);
            out.push(vec![s, Point::new(x, s.y), Point::new(x, t.y), t]);
        }
        out
    }

    /// Bend-minimal monotone route on the grid of square edges.
    fn grid_route(&self, o: &Oriented<T>) -> Option<Vec<Point<T>>> {
        let (s, t) = self.corners(o);
        let others: Vec<Rect<T>> = self
            .others_by_bottom(o)
            .filter(|r| r.max.x > s.x && r.min.x < t.x && r.max.y > s.y && r.min.y < t.y)
            .collect();
        let mut xs = vec![s.x, t.x];
        let mut ys = vec![s.y, t.y];
        for r in &others {
            xs.extend([r.min.x, r.max.x].into_iter().filter(|&v| v > s.x && v < t.x));
            ys.extend([r.min.y, r.max.y].into_iter().filter(|&v| v > s.y && v < t.y));
        }
        let dedup = |v: &mut Vec<T>| {
            v.sort_by(|a, b| a.partial_cmp(b).unwrap());
            v.dedup_by(|a, b| (*a - *b).abs() <= T::zero());
        };
        dedup(&mut xs);
        dedup(&mut ys);
        let (nx, ny) = (xs.len(), ys.len());
        let free = |p: Point<T>, q: Point<T>| others.iter().all(|r| !segment_hits(p, q, r, self.tol));
        // cost[i][j][d]: fewest bends reaching (i, j) moving in d (0 right, 1 up)
        const INF: usize = usize::MAX / 2;
        let idx = |i: usize, j: usize| i * ny + j;
        let mut cost = vec![[INF; 2]; nx * ny];
        let mut parent = vec![[None::<(usize, usize)>; 2]; nx * ny];
        cost[0] = [0, 0];
        for sum in 0..nx + ny - 1 {
            for i in 0..nx {
                if sum < i || sum - i >= ny {
                    continue;
                }
                let j = sum - i;
                let here = cost[idx(i, j)];
                if here == [INF; 2] {
                    continue;
                }
                let p = Point::new(xs[i], ys[j]);
                for (d, (ni, nj)) in [(0, (i + 1, j)), (1, (i, j + 1))] {
                    if ni >= nx || nj >= ny || !free(p, Point::new(xs[ni], ys[nj])) {
                        continue;
                    }
                    for (pd, &c) in here.iter().enumerate() {
                        if c == INF {
                            continue;
                        }
                        let nc = c + usize::from(pd != d && !(i == 0 && j == 0));
                        if nc < cost[idx(ni, nj)][d] {
                            cost[idx(ni, nj)][d] = nc;
                            parent[idx(ni, nj)][d] = Some((idx(i, j), pd));
                        }
                    }
                }
            }
        }
        let end = idx(nx - 1, ny - 1);
        if nx == 1 && ny == 1 {
            return Some(vec![s, t]);
        }
        let mut d = if cost[end][0] <= cost[end][1] { 0 } else { 1 };
        if cost[end][d] == INF {
            return None;
        }
        let mut node = end;
        let mut pts = vec![Point::new(xs[node / ny], ys[node % ny])];
        while let Some((prev, pd)) = parent[node][d] {
            node = prev;
            d = pd;
            pts.push(Point::new(xs[node / ny], ys[node % ny]));
        }
        pts.reverse();
        Some(pts)
    }

    fn verify(&self, leader: &Leader<T>) -> bool {
        verify_leader(self.layout, leader, self.tol).is_ok()
    }

    fn min_leader(&self, r1: usize, r2: usize) -> Result<Leader<T>, LeaderError> {
        let o = self.orient(r1, r2)?;
        if let Some(pts) = self.straight(&o) {
            let l = self.finish(&o, pts, Construction::Straight);
            if self.verify(&l) {
                return Ok(l);
            }
        }
        let l = self.finish(&o, self.staircase(&o), Construction::Staircase);
        if self.verify(&l) {
            return Ok(l);
        }
        self.grid_fallback(&o)
    }

    fn two_bend_leader(&self, r1: usize, r2: usize) -> Result<Leader<T>, LeaderError> {
        if self.cs.setting != Setting::Strong {
            return Err(LeaderError::WeakSetting);
        }
        let o = self.orient(r1, r2)?;
        if let Some(pts) = self.straight(&o) {
            let l = self.finish(&o, pts, Construction::Straight);
            if self.verify(&l) {
                return Ok(l);
            }
        }
        for pts in self.two_bend_candidates(&o) {
            let l = self.finish(&o, pts, Construction::TwoBend);
            if self.verify(&l) {
                return Ok(l);
            }
        }
        self.grid_fallback(&o)
    }

    fn grid_fallback(&self, o: &Oriented<T>) -> Result<Leader<T>, LeaderError> {
        let pts = self.grid_route(o).ok_or(LeaderError::NoRoute)?;
        let l = self.finish(o, pts, Construction::GridSearch);
        if self.verify(&l) {
            Ok(l)
        } else {
            Err(LeaderError::NoRoute)
        }
    }
}

/// Whether the axis-parallel segment `p`-`q` meets the open interior of `r`.
pub fn segment_hits<T: Scalar>(p: Point<T>, q: Point<T>, r: &Rect<T>, tol: T) -> bool {
    let (x0, x1) = (p.x.min(q.x), p.x.max(q.x));
    let (y0, y1) = (p.y.min(q.y), p.y.max(q.y));
    let ox = x1.min(r.max.x) - x0.max(r.min.x);
    let oy = y1.min(r.max.y) - y0.max(r.min.y);
    if x0 == x1 {
        // vertical
        x0 > r.min.x + tol && x0 < r.max.x - tol && oy > tol
    } else {
        y0 > r.min.y + tol && y0 < r.max.y - tol && ox > tol
    }
}

fn on_boundary<T: Scalar>(p: Point<T>, r: &Rect<T>, tol: T) -> bool {
    let inside = p.x >= r.min.x - tol && p.x <= r.max.x + tol && p.y >= r.min.y - tol && p.y <= r.max.y + tol;
    let edge = (p.x - r.min.x).abs() <= tol
        || (p.x - r.max.x).abs() <= tol
        || (p.y - r.min.y).abs() <= tol
        || (p.y - r.max.y).abs() <= tol;
    inside && edge
}

/// Geometric acceptance test for a leader: endpoints on the two squares,
/// axis-parallel segments, monotone, length equal to the squares' L1 gap,
/// and no segment through any square interior.
pub fn verify_leader<T: Scalar>(layout: &SquareLayout<T>, leader: &Leader<T>, tol: T) -> Result<(), String> {
    let pts = &leader.points;
    if pts.len() < 2 {
        return Err("leader has fewer than two points".into());
    }
    let (a, b) = (layout.square(leader.from), layout.square(leader.to));
    if !on_boundary(pts[0], &a, tol) || !on_boundary(pts[pts.len() - 1], &b, tol) {
        return Err("endpoint off its square".into());
    }
    for w in pts.windows(2) {
        if w[0].x != w[1].x && w[0].y != w[1].y {
            return Err("diagonal segment".into());
        }
    }
    let (sx, sy) = (pts[pts.len() - 1].x - pts[0].x, pts[pts.len() - 1].y - pts[0].y);
    for w in pts.windows(2) {
        let (dx, dy) = (w[1].x - w[0].x, w[1].y - w[0].y);
        if dx * sx < T::zero() || dy * sy < T::zero() {
            return Err("not monotone".into());
        }
    }
    let gap = layout.l1_gap(leader.from, leader.to);
    if (leader.length - gap).abs() > tol {
        return Err(format!("length {} differs from gap {}", leader.length, gap));
    }
    for r in 0..layout.len() {
        let sq = layout.square(r);
        if pts.windows(2).any(|w| segment_hits(w[0], w[1], &sq, tol)) {
            return Err(format!("crosses square {}", layout.ids[r]));
        }
    }
    Ok(())
}

/// Minimal-length monotone leader between the squares of `r1` and `r2`.
pub fn min_leader<T: Scalar>(
    layout: &SquareLayout<T>,
    cs: &SeparationConstraintSet<T>,
    r1: usize,
    r2: usize,
) -> Result<Leader<T>, LeaderError> {
    Router::new(layout, cs).min_leader(r1, r2)
}

/// Leader with at most two bends where the strong setting allows one.
pub fn two_bend_leader<T: Scalar>(
    layout: &SquareLayout<T>,
    cs: &SeparationConstraintSet<T>,
    r1: usize,
    r2: usize,
) -> Result<Leader<T>, LeaderError> {
    Router::new(layout, cs).two_bend_leader(r1, r2)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum LeaderStyle {
    #[default]
    Minimal,
    /// Two-bend construction under strong constraints, falling back to
    /// minimal leaders for weak sets.
    FewBends,
}

#[derive(Clone, Debug, Default)]
pub struct LeaderReport<T> {
    pub leaders: Vec<Leader<T>>,
    /// Lost adjacencies that could not be routed, with the reason.
    pub unroutable: Vec<(usize, usize, LeaderError)>,
    /// Leader pairs that share a point.
    pub overlapping_pairs: usize,
}

/// Routes a leader for every map adjacency whose squares do not touch.
pub fn all_leaders<T: Scalar>(
    layout: &SquareLayout<T>,
    cs: &SeparationConstraintSet<T>,
    map: &AdjacencyGraph<T>,
    style: LeaderStyle,
) -> LeaderReport<T> {
    let router = Router::new(layout, cs);
    let mut report = LeaderReport {
        leaders: Vec::new(),
        unroutable: Vec::new(),
        overlapping_pairs: 0,
    };
    let lost_tol = map.diagonal() * T::of(1e-6);
    for (a, b) in map.edges() {
        if layout.l1_gap(a, b) <= lost_tol {
            continue;
        }
        let routed = match style {
            LeaderStyle::FewBends if cs.setting == Setting::Strong => router.two_bend_leader(a, b),
            _ => router.min_leader(a, b),
        };
        match routed {
            Ok(l) => report.leaders.push(l),
            Err(e) => report.unroutable.push((a, b, e)),
        }
    }
    for i in 0..report.leaders.len() {
        for j in i + 1..report.leaders.len() {
            if polylines_touch(&report.leaders[i].points, &report.leaders[j].points) {
                report.overlapping_pairs += 1;
            }
        }
    }
    report
}

fn polylines_touch<T: Scalar>(p: &[Point<T>], q: &[Point<T>]) -> bool {
    let bbox = |a: Point<T>, b: Point<T>| Rect::new(Point::new(a.x.min(b.x), a.y.min(b.y)), Point::new(a.x.max(b.x), a.y.max(b.y)));
    p.windows(2).any(|s| {
        let r = bbox(s[0], s[1]);
        q.windows(2).any(|t| {
            let u = bbox(t[0], t[1]);
            r.min.x <= u.max.x && u.min.x <= r.max.x && r.min.y <= u.max.y && u.min.y <= r.max.y
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sepconstraints::{ConstraintKind, SeparationConstraint};

    fn layout(centers: &[(f64, f64)], sides: &[f64]) -> SquareLayout<f64> {
        SquareLayout {
            ids: (0..centers.len()).map(|i| format!("r{i}")).collect(),
            centers: centers.iter().map(|&(x, y)| Point::new(x, y)).collect(),
            sides: sides.to_vec(),
            function_index: 0,
            constraint_ref: 0,
        }
    }

    fn cons(before: usize, after: usize, adjacent: bool) -> SeparationConstraint {
        SeparationConstraint {
            before,
            after,
            kind: ConstraintKind::Primary,
            adjacent,
        }
    }

    #[test]
    fn straight_case() {
        let l = layout(&[(0.0, 0.0), (8.0, 0.0)], &[4.0, 2.0]);
        let cs = SeparationConstraintSet::from_parts(2, vec![cons(0, 1, true)], vec![], 0.1, Setting::Weak);
        let leader = min_leader(&l, &cs, 0, 1).unwrap();
        assert_eq!(leader.length, 5.0);
        assert_eq!(leader.bends, 0);
        assert_eq!(leader.construction, Construction::Straight);
        assert_eq!(leader.points, vec![Point::new(2.0, 0.0), Point::new(7.0, 0.0)]);
    }

    #[test]
    fn intact_pair_is_refused() {
        let l = layout(&[(0.0, 0.0), (3.0, 0.0)], &[4.0, 2.0]);
        let cs = SeparationConstraintSet::from_parts(2, vec![cons(0, 1, true)], vec![], 0.1, Setting::Weak);
        assert_eq!(min_leader(&l, &cs, 0, 1).unwrap_err(), LeaderError::Intact);
    }

    #[test]
    fn empty_blocker_set_gives_one_corner() {
        let l = layout(&[(0.0, 0.0), (5.0, 6.0)], &[2.0, 2.0]);
        let cs = SeparationConstraintSet::from_parts(2, vec![cons(0, 1, true)], vec![], 0.1, Setting::Strong);
        let leader = two_bend_leader(&l, &cs, 0, 1).unwrap();
        assert_eq!(leader.bends, 1);
        assert_eq!(leader.length, 3.0 + 4.0);
    }

    #[test]
    fn vertical_pair_mirrored_below() {
        // target below the source in a V constraint
        let l = layout(&[(0.0, 10.0), (3.0, 0.0)], &[2.0, 2.0]);
        let cs = SeparationConstraintSet::from_parts(2, vec![], vec![cons(1, 0, true)], 0.1, Setting::Weak);
        let leader = min_leader(&l, &cs, 0, 1).unwrap();
        assert_eq!(leader.length, l.l1_gap(0, 1));
        verify_leader(&l, &leader, 1e-9).unwrap();
    }

    #[test]
    fn non_minimal_pair_is_reported() {
        let l = layout(&[(0.0, 0.0), (4.0, 0.0), (8.0, 0.0)], &[2.0, 2.0, 2.0]);
        let cs = SeparationConstraintSet::from_parts(
            3,
            vec![cons(0, 1, false), cons(1, 2, false), cons(0, 2, true)],
            vec![],
            0.1,
            Setting::Weak,
        );
        assert_eq!(min_leader(&l, &cs, 0, 2).unwrap_err(), LeaderError::NotMinimal(1));
    }

    #[test]
    fn segment_intersection() {
        let r = Rect::new(Point::new(0.0, 0.0), Point::new(2.0, 2.0));
        assert!(segment_hits(Point::new(-1.0, 1.0), Point::new(3.0, 1.0), &r, 0.0));
        assert!(!segment_hits(Point::new(-1.0, 2.0), Point::new(3.0, 2.0), &r, 0.0));
        assert!(!segment_hits(Point::new(2.0, -1.0), Point::new(2.0, 3.0), &r, 0.0));
        assert!(segment_hits(Point::new(1.0, -1.0), Point::new(1.0, 0.5), &r, 0.0));
    }
}
