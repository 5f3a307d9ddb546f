//! Oracles and fixtures shared by the integration tests.
//!
//! Nothing here calls into the code under test beyond reading its data
//! types, so the checks stay independent of the implementation.

#![allow(dead_code)]

use demers::geometry::Point;
use demers::lpmodel::{LpProblem, Relation};
use demers::mapdata::{region_from_parts, AdjacencyGraph};
use demers::sepconstraints::{Axis, SeparationConstraintSet};
use demers::layout::SquareLayout;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Result of the exact simplex.
#[derive(Clone, Debug, PartialEq)]
pub enum Exact {
    Optimal(BigRational),
    Infeasible,
    Unbounded,
}

fn q(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite coefficient")
}

enum Column {
    /// `x = offset + sign * col`
    Shifted { col: usize, sign: i32, offset: BigRational },
    /// `x = pos - neg`
    Split { pos: usize, neg: usize },
}

type Row = (Vec<(usize, BigRational)>, Relation, BigRational);

/// Two-phase dense tableau simplex over big rationals with Bland's rule.
pub fn exact_solve(p: &LpProblem<f64>) -> Exact {
    let mut ncols = 0;
    let mut columns = Vec::new();
    let mut rows: Vec<Row> = Vec::new();
    let mut bound_rows: Vec<Row> = Vec::new();
    for v in &p.variables {
        let (lo, hi) = (v.lower, v.upper);
        if lo.is_finite() {
            columns.push(Column::Shifted { col: ncols, sign: 1, offset: q(lo) });
            if hi.is_finite() {
                bound_rows.push((vec![(ncols, BigRational::one())], Relation::Le, q(hi) - q(lo)));
            }
            ncols += 1;
        } else if hi.is_finite() {
            columns.push(Column::Shifted { col: ncols, sign: -1, offset: q(hi) });
            ncols += 1;
        } else {
            columns.push(Column::Split { pos: ncols, neg: ncols + 1 });
            ncols += 2;
        }
    }
    let expand = |terms: &[(usize, f64)]| {
        let mut out = Vec::new();
        let mut constant = BigRational::zero();
        for &(j, a) in terms {
            let a = q(a);
            match &columns[j] {
                Column::Shifted { col, sign, offset } => {
                    constant += &a * offset;
                    let s = if *sign > 0 { a } else { -a };
                    out.push((*col, s));
                }
                Column::Split { pos, neg } => {
                    out.push((*pos, a.clone()));
                    out.push((*neg, -a));
                }
            }
        }
        (out, constant)
    };
    for c in &p.constraints {
        let terms: Vec<(usize, f64)> = c.terms.iter().map(|&(v, a)| (v.0, a)).collect();
        let (t, k) = expand(&terms);
        rows.push((t, c.relation, q(c.rhs) - k));
    }
    rows.extend(bound_rows);
    let obj_terms: Vec<(usize, f64)> = p.objective.iter().copied().enumerate().collect();
    let (obj, obj_const) = expand(&obj_terms);

    let m = rows.len();
    let slacks: Vec<Option<usize>> = {
        let mut next = ncols;
        rows.iter()
            .map(|(_, rel, _)| match rel {
                Relation::Eq => None,
                _ => {
                    next += 1;
                    Some(next - 1)
                }
            })
            .collect()
    };
    let n_real = ncols + slacks.iter().flatten().count();
    let width = n_real + m + 1;
    let mut t = vec![vec![BigRational::zero(); width]; m];
    for (i, (terms, rel, rhs)) in rows.iter().enumerate() {
        for (j, a) in terms {
            t[i][*j] += a;
        }
        if let Some(s) = slacks[i] {
            t[i][s] = match rel {
                Relation::Le => BigRational::one(),
                _ => -BigRational::one(),
            };
        }
        t[i][width - 1] = rhs.clone();
        if rhs.is_negative() {
            for x in t[i].iter_mut() {
                *x = -x.clone();
            }
        }
        t[i][n_real + i] = BigRational::one();
    }
    let mut basis: Vec<usize> = (n_real..n_real + m).collect();

    let mut phase1 = vec![BigRational::zero(); width - 1];
    for c in phase1.iter_mut().skip(n_real) {
        *c = BigRational::one();
    }
    if !run_simplex(&mut t, &mut basis, &phase1, width - 1) {
        unreachable!("phase one is bounded below by zero");
    }
    let infeas: BigRational = basis
        .iter()
        .zip(&t)
        .filter(|(&b, _)| b >= n_real)
        .map(|(_, row)| row[width - 1].clone())
        .sum();
    if infeas.is_positive() {
        return Exact::Infeasible;
    }
    // pivot artificials out of the basis, dropping redundant rows
    let mut i = 0;
    while i < t.len() {
        if basis[i] >= n_real {
            match (0..n_real).find(|&j| !t[i][j].is_zero()) {
                Some(j) => pivot(&mut t, &mut basis, i, j),
                None => {
                    t.remove(i);
                    basis.remove(i);
                    continue;
                }
            }
        }
        i += 1;
    }
    let mut phase2 = vec![BigRational::zero(); width - 1];
    for (j, c) in &obj {
        phase2[*j] += c;
    }
    if !run_simplex(&mut t, &mut basis, &phase2, n_real) {
        return Exact::Unbounded;
    }
    let value: BigRational = basis
        .iter()
        .zip(&t)
        .map(|(&b, row)| &phase2[b] * &row[width - 1])
        .sum();
    Exact::Optimal(value + obj_const)
}

fn pivot(t: &mut [Vec<BigRational>], basis: &mut [usize], r: usize, c: usize) {
    let p = t[r][c].clone();
    for x in t[r].iter_mut() {
        *x /= &p;
    }
    let prow = t[r].clone();
    for (i, row) in t.iter_mut().enumerate() {
        if i == r || row[c].is_zero() {
            continue;
        }
        let f = row[c].clone();
        for (x, y) in row.iter_mut().zip(&prow) {
            if !y.is_zero() {
                *x -= &f * y;
            }
        }
    }
    basis[r] = c;
}

/// Minimises `cost` over columns `< allowed`; false when unbounded.
fn run_simplex(t: &mut [Vec<BigRational>], basis: &mut [usize], cost: &[BigRational], allowed: usize) -> bool {
    let rhs = cost.len();
    loop {
        let entering = (0..allowed).filter(|j| !basis.contains(j)).find(|&j| {
            let z: BigRational = basis.iter().zip(t.iter()).map(|(&b, row)| &cost[b] * &row[j]).sum();
            (&cost[j] - z).is_negative()
        });
        let Some(j) = entering else { return true };
        let leave = (0..t.len())
            .filter(|&i| t[i][j].is_positive())
            .map(|i| (&t[i][rhs] / &t[i][j], basis[i], i))
            .min_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
        let Some((_, _, i)) = leave else { return false };
        pivot(t, basis, i, j);
    }
}

pub fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().expect("representable")
}

/// Small LP with integer data; bounds are a mix of nonnegative, boxed,
/// free and shifted so every column translation path is exercised.
pub fn random_lp(rng: &mut ChaCha8Rng) -> LpProblem<f64> {
    let n = rng.gen_range(1..=8);
    let m = rng.gen_range(1..=12);
    let mut p = LpProblem::new("random");
    let vars: Vec<_> = (0..n)
        .map(|j| {
            let name = format!("x{j}");
            match rng.gen_range(0..10) {
                0..=5 => p.add_nonneg_var(name),
                6 => {
                    let u = rng.gen_range(1..=6) as f64;
                    p.add_var(name, -u, u)
                }
                7 | 8 => p.add_free_var(name),
                _ => p.add_var(name, rng.gen_range(-3..=3) as f64, f64::INFINITY),
            }
        })
        .collect();
    for i in 0..m {
        let mut terms = Vec::new();
        for &v in &vars {
            let a = rng.gen_range(-4..=4) as f64;
            if a != 0.0 && rng.gen_bool(0.7) {
                terms.push((v, a));
            }
        }
        let rel = match rng.gen_range(0..6) {
            0..=2 => Relation::Le,
            3 | 4 => Relation::Ge,
            _ => Relation::Eq,
        };
        p.add_constraint(format!("c{i}"), terms, rel, rng.gen_range(-10..=10) as f64);
    }
    for &v in &vars {
        p.add_objective(v, rng.gen_range(-5..=5) as f64);
    }
    p
}

/// Lengths handed to the CNT oracle must be multiples of a quarter, so scaled by four the
/// difference-constraint systems are integral and Bellman-Ford is exact.
const UNIT: f64 = 4.0;

/// Whether the squares can keep every adjacency in `kept` touching. With
/// the measure variables forced to zero, each requirement is a difference
/// constraint on one axis, so feasibility is the absence of a negative
/// cycle.
pub fn keeps(map: &AdjacencyGraph<f64>, sides: &[f64], cs: &SeparationConstraintSet<f64>, kept: &[(usize, usize)]) -> bool {
    [Axis::H, Axis::V].into_iter().all(|axis| {
        // (from, to, w): pos[to] - pos[from] <= w
        let mut arcs: Vec<(usize, usize, i64)> = Vec::new();
        let scaled = |x: f64| (x * UNIT).round() as i64;
        for c in cs.axis(axis) {
            let need = (sides[c.before] + sides[c.after]) / 2.0 + cs.gap(c);
            arcs.push((c.after, c.before, -scaled(need)));
        }
        for &(a, b) in kept {
            let (sep, _) = cs.primary_between(a, b).expect("adjacent pairs are constrained");
            let slack = if sep == axis { 0.0 } else { cs.epsilon };
            let w = scaled((sides[a] + sides[b]) / 2.0 - slack);
            arcs.push((a, b, w));
            arcs.push((b, a, w));
        }
        let mut dist = vec![0i64; map.len()];
        for _ in 0..map.len() {
            let mut changed = false;
            for &(u, v, w) in &arcs {
                if dist[u] + w < dist[v] {
                    dist[v] = dist[u] + w;
                    changed = true;
                }
            }
            if !changed {
                return true;
            }
        }
        false
    })
}

/// Fewest lost adjacencies over all kept-edge subsets.
pub fn fewest_lost(map: &AdjacencyGraph<f64>, sides: &[f64], cs: &SeparationConstraintSet<f64>) -> usize {
    let edges: Vec<_> = map.edges().collect();
    (0u32..1 << edges.len())
        .filter_map(|mask| {
            let kept: Vec<_> = edges.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &e)| e).collect();
            keeps(map, sides, cs, &kept).then(|| edges.len() - kept.len())
        })
        .min()
        .expect("losing everything is always feasible")
}

/// A `rows x cols` grid of quadrilaterals with jittered interior vertices on
/// a quarter-unit lattice; cell size 8.
pub fn lattice_grid(rows: usize, cols: usize, seed: u64) -> AdjacencyGraph<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut verts = vec![vec![Point::new(0.0, 0.0); cols + 1]; rows + 1];
    for (i, row) in verts.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            let jx = if j > 0 && j < cols { rng.gen_range(-8..=8) as f64 * 0.25 } else { 0.0 };
            let jy = if i > 0 && i < rows { rng.gen_range(-8..=8) as f64 * 0.25 } else { 0.0 };
            *v = Point::new(j as f64 * 8.0 + jx, i as f64 * 8.0 + jy);
        }
    }
    let mut regions = Vec::new();
    for i in 0..rows {
        for j in 0..cols {
            let ring = vec![verts[i][j], verts[i][j + 1], verts[i + 1][j + 1], verts[i + 1][j], verts[i][j]];
            regions.push(region_from_parts(format!("r{i}c{j}"), vec![vec![ring]]).unwrap());
        }
    }
    AdjacencyGraph::from_regions(regions).unwrap()
}

/// `n` rectangles from recursive guillotine cuts of a 24 x 24 square,
/// always splitting the largest piece across its longer side at a random
/// whole coordinate.
pub fn dissection(n: usize, seed: u64) -> AdjacencyGraph<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pieces = vec![[0i32, 0, 24, 24]];
    while pieces.len() < n {
        let (i, _) = pieces
            .iter()
            .enumerate()
            .max_by_key(|(_, r)| (r[2] - r[0]) * (r[3] - r[1]))
            .unwrap();
        let [x0, y0, x1, y1] = pieces.swap_remove(i);
        if x1 - x0 >= y1 - y0 {
            let cut = rng.gen_range(x0 + 1..x1);
            pieces.push([x0, y0, cut, y1]);
            pieces.push([cut, y0, x1, y1]);
        } else {
            let cut = rng.gen_range(y0 + 1..y1);
            pieces.push([x0, y0, x1, cut]);
            pieces.push([x0, cut, x1, y1]);
        }
    }
    let regions = pieces
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let [x0, y0, x1, y1] = r.map(f64::from);
            let ring = vec![
                Point::new(x0, y0),
                Point::new(x1, y0),
                Point::new(x1, y1),
                Point::new(x0, y1),
                Point::new(x0, y0),
            ];
            region_from_parts(format!("p{i}"), vec![vec![ring]]).unwrap()
        })
        .collect();
    AdjacencyGraph::from_regions(regions).unwrap()
}

/// Every way `layout` breaks `cs`: short separations, overlapping
/// interiors, or missing clearance between nonadjacent constrained pairs.
pub fn validity_violations(layout: &SquareLayout<f64>, cs: &SeparationConstraintSet<f64>, tol: f64) -> Vec<String> {
    let mut out = Vec::new();
    for (axis, c) in cs.iter() {
        let (a, b) = (layout.centers[c.before], layout.centers[c.after]);
        let d = match axis {
            Axis::H => b.x - a.x,
            Axis::V => b.y - a.y,
        };
        let need = (layout.sides[c.before] + layout.sides[c.after]) / 2.0 + cs.gap(c);
        if d < need - tol {
            out.push(format!("{axis:?} {} -> {} short by {}", c.before, c.after, need - d));
        }
    }
    for i in 0..layout.len() {
        for j in i + 1..layout.len() {
            let w = (layout.sides[i] + layout.sides[j]) / 2.0;
            let ox = w - (layout.centers[i].x - layout.centers[j].x).abs();
            let oy = w - (layout.centers[i].y - layout.centers[j].y).abs();
            if ox > tol && oy > tol {
                out.push(format!("squares {i} and {j} overlap"));
            }
        }
    }
    out
}

/// Whether the axis-parallel segment `p`-`q` passes through the open
/// interior of the square at `c` with side `s`, shrunk by `tol`.
pub fn segment_enters(p: Point<f64>, q: Point<f64>, c: Point<f64>, s: f64, tol: f64) -> bool {
    let h = s / 2.0 - tol;
    if h <= 0.0 {
        return false;
    }
    let (x0, x1) = (p.x.min(q.x), p.x.max(q.x));
    let (y0, y1) = (p.y.min(q.y), p.y.max(q.y));
    x1 > c.x - h && x0 < c.x + h && y1 > c.y - h && y0 < c.y + h
}

/// L1 distance between two squares given by centre and side.
pub fn square_gap(c1: Point<f64>, s1: f64, c2: Point<f64>, s2: f64) -> f64 {
    let w = (s1 + s2) / 2.0;
    ((c1.x - c2.x).abs() - w).max(0.0) + ((c1.y - c2.y).abs() - w).max(0.0)
}

/// One-sided sign test: probability of at least `wins` successes out of
/// `n` fair coin flips.
pub fn sign_test_p(wins: usize, n: usize) -> f64 {
    let mut p = 0.0;
    let mut c = 1.0f64;
    for k in 0..=n {
        if k > 0 {
            c = c * (n - k + 1) as f64 / k as f64;
        }
        if k >= wins {
            p += c;
        }
    }
    p / 2f64.powi(n as i32)
}

/// Axis-aligned box as `[min x, min y, max x, max y]`.
pub type BoxF = [f64; 4];

pub fn square_box(c: Point<f64>, s: f64) -> BoxF {
    [c.x - s / 2.0, c.y - s / 2.0, c.x + s / 2.0, c.y + s / 2.0]
}

pub fn polygon_box(region: &demers::mapdata::Region<f64>) -> BoxF {
    let pts = region.polygon.iter().flatten();
    let mut b = [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY];
    for p in pts {
        b = [b[0].min(p.x), b[1].min(p.y), b[2].max(p.x), b[3].max(p.y)];
    }
    b
}

fn intersection_area(a: BoxF, b: BoxF) -> f64 {
    ((a[2].min(b[2]) - a[0].max(b[0])).max(0.0)) * ((a[3].min(b[3]) - a[1].max(b[1])).max(0.0))
}

/// Share of `other` in each of the eight zones around `reference`, in the
/// order N, NE, E, SE, S, SW, W, NW, ignoring the part in the middle cell.
pub fn zones(reference: BoxF, other: BoxF) -> [f64; 8] {
    const FAR: f64 = 1e12;
    let xs = [(-FAR, reference[0]), (reference[0], reference[2]), (reference[2], FAR)];
    let ys = [(-FAR, reference[1]), (reference[1], reference[3]), (reference[3], FAR)];
    let cells = [(1, 2), (2, 2), (2, 1), (2, 0), (1, 0), (0, 0), (0, 1), (0, 2)];
    let mut v = cells.map(|(c, r): (usize, usize)| intersection_area(other, [xs[c].0, ys[r].0, xs[c].1, ys[r].1]));
    let total: f64 = v.iter().sum();
    if total > 0.0 {
        v.iter_mut().for_each(|x| *x /= total);
    } else {
        v = [0.125; 8];
    }
    v
}

pub fn relative_change(a: &[BoxF], b: &[BoxF]) -> f64 {
    let n = a.len();
    if n < 2 {
        return 0.0;
    }
    let mut sum = 0.0;
    for r in 0..n {
        for s in 0..n {
            if r != s {
                let (p, q) = (zones(a[r], a[s]), zones(b[r], b[s]));
                sum += p.iter().zip(&q).map(|(x, y)| (x - y).abs()).sum::<f64>() / 2.0;
            }
        }
    }
    sum / (n * (n - 1)) as f64
}

/// The five scores computed from scratch, without clamping.
#[derive(Clone, Copy, Debug)]
pub struct RawScores {
    pub madj: f64,
    pub mrel: f64,
    pub mdis: f64,
}

pub fn raw_quality(layout: &SquareLayout<f64>, map: &AdjacencyGraph<f64>) -> RawScores {
    let boxes: Vec<BoxF> = map.regions().iter().map(polygon_box).collect();
    let bb = boxes.iter().fold([f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY], |b, r| {
        [b[0].min(r[0]), b[1].min(r[1]), b[2].max(r[2]), b[3].max(r[3])]
    });
    let diag = ((bb[2] - bb[0]).powi(2) + (bb[3] - bb[1]).powi(2)).sqrt();
    let edges: Vec<_> = map.edges().collect();
    let lost = edges
        .iter()
        .filter(|&&(a, b)| square_gap(layout.centers[a], layout.sides[a], layout.centers[b], layout.sides[b]) > 1e-6 * diag)
        .count();
    let squares: Vec<BoxF> = (0..layout.len()).map(|r| square_box(layout.centers[r], layout.sides[r])).collect();
    let disp: f64 = map
        .regions()
        .iter()
        .zip(&layout.centers)
        .map(|(r, c)| (r.centroid.x - c.x).abs() + (r.centroid.y - c.y).abs())
        .sum();
    RawScores {
        madj: if edges.is_empty() { 0.0 } else { lost as f64 / edges.len() as f64 },
        mrel: relative_change(&boxes, &squares),
        mdis: disp / layout.len() as f64 / ((bb[2] - bb[0]) + (bb[3] - bb[1])),
    }
}

/// Unclamped `(sdis, srel)` between two layouts of the same regions.
pub fn raw_stability(a: &SquareLayout<f64>, b: &SquareLayout<f64>) -> (f64, f64) {
    let boxes = |l: &SquareLayout<f64>| -> Vec<BoxF> { (0..l.len()).map(|r| square_box(l.centers[r], l.sides[r])).collect() };
    let (ba, bb) = (boxes(a), boxes(b));
    let extent = |bs: &[BoxF]| {
        let u = bs.iter().fold([f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY], |u, r| {
            [u[0].min(r[0]), u[1].min(r[1]), u[2].max(r[2]), u[3].max(r[3])]
        });
        (u[2] - u[0]) + (u[3] - u[1])
    };
    let norm = extent(&ba).max(extent(&bb));
    let total: f64 = (0..a.len())
        .map(|r| {
            let (dx, dy) = (a.centers[r].x - b.centers[r].x, a.centers[r].y - b.centers[r].y);
            let ds = a.sides[r] - b.sides[r];
            (dx * dx + dy * dy + 2.0 * ds * ds).sqrt()
        })
        .sum();
    (total / a.len() as f64 / norm, relative_change(&ba, &bb))
}

/// Pairwise overlap area over total square area.
pub fn overlap_fraction(layout: &SquareLayout<f64>) -> f64 {
    let boxes: Vec<BoxF> = (0..layout.len()).map(|r| square_box(layout.centers[r], layout.sides[r])).collect();
    let mut overlap = 0.0;
    for i in 0..boxes.len() {
        for j in i + 1..boxes.len() {
            overlap += intersection_area(boxes[i], boxes[j]);
        }
    }
    overlap / layout.sides.iter().map(|s| s * s).sum::<f64>()
}
