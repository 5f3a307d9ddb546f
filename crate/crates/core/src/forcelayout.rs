//! Force-directed square placement, used as a baseline.
//!
//! Each region feels a disjointness force from every square it overlaps,
//! `D · ((m - L∞) / m)²` along the centre difference, plus a quality force
//! pulling it either toward its map origin or toward the squares of its
//! map neighbours. Forces are computed from the old state and applied
//! together, capped so that no square moves further than the smallest side.

use log::warn;

use crate::geometry::Point;
use crate::layout::SquareLayout;
use crate::mapdata::AdjacencyGraph;
use crate::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
pub enum QualityForce {
    /// Attract each square to its map origin.
    Origin,
    /// Attract each square to the squares of its map neighbours.
    Topology,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
pub enum ForceInit {
    MapOrigins,
    PreviousLayout,
}

/// How the summed force becomes a displacement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum StepRule {
    /// Displacement equals the force times the damping factor, subject to
    /// the global cap.
    Direct,
    /// Divide each region's force by an estimate of its local stiffness
    /// (a Jacobi step) and scale by an adaptive damping factor. Converges
    /// to the same equilibria far faster when squares are pressed together.
    Preconditioned,
    /// FIRE relaxation (inertial steps with velocity mixing and restarts)
    /// driven by the preconditioned force. [`force_step`] treats it like
    /// `Preconditioned`; [`run_frc`] keeps the velocity state.
    Inertial,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ForceConfig<T> {
    pub quality: QualityForce,
    pub init: ForceInit,
    /// Multiplier `D` of the disjointness force.
    pub disjointness_scale: T,
    /// Convergence when every force is below this times the minimum side.
    pub threshold: T,
    pub max_iterations: usize,
    /// Clearance required between nonadjacent squares.
    pub gap: T,
    pub step: StepRule,
}

impl<T: Scalar> ForceConfig<T> {
    pub fn new(quality: QualityForce, init: ForceInit) -> Self {
        ForceConfig {
            quality,
            init,
            disjointness_scale: T::of(50_000.0),
            threshold: T::of(1e-5),
            max_iterations: 100_000,
            gap: T::zero(),
            step: StepRule::Inertial,
        }
    }
}

/// Forces and local stiffness estimates for one state.
pub struct ForceField<T> {
    pub forces: Vec<Point<T>>,
    pub stiffness: Vec<T>,
}

fn fnv(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// Deterministic unit vector for a coincident pair, pointing from `b` to `a`.
fn jitter_direction<T: Scalar>(a: &str, b: &str) -> Point<T> {
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut key = lo.as_bytes().to_vec();
    key.push(0);
    key.extend_from_slice(hi.as_bytes());
    let angle = (fnv(&key) % 3_600_000) as f64 / 3_600_000.0 * std::f64::consts::TAU;
    Point::new(T::of(sign * angle.cos()), T::of(sign * angle.sin()))
}

/// Bounding-box diagonal of the region origins.
pub fn origin_diagonal<T: Scalar>(map: &AdjacencyGraph<T>) -> T {
    let origins = map.origins();
    let (mut lo, mut hi) = (origins[0], origins[0]);
    for o in &origins {
        lo = Point::new(lo.x.min(o.x), lo.y.min(o.y));
        hi = Point::new(hi.x.max(o.x), hi.y.max(o.y));
    }
    lo.dist(&hi)
}

/// Raw per-region forces.
pub fn compute_forces<T: Scalar>(
    centers: &[Point<T>],
    sides: &[T],
    map: &AdjacencyGraph<T>,
    cfg: &ForceConfig<T>,
    delta: T,
) -> ForceField<T> {
    let n = centers.len();
    let zero = Point::new(T::zero(), T::zero());
    let mut forces = vec![zero; n];
    let mut stiffness = vec![T::zero(); n];
    let d = cfg.disjointness_scale;
    for a in 0..n {
        for b in a + 1..n {
            let adjacent = map.is_adjacent(a, b);
            let m = (sides[a] + sides[b]) * T::half() + if adjacent { T::zero() } else { cfg.gap };
            let linf = centers[a].linf(&centers[b]);
            if linf >= m {
                continue;
            }
            let dir = {
                let (dx, dy) = (centers[a].x - centers[b].x, centers[a].y - centers[b].y);
                let len = (dx * dx + dy * dy).sqrt();
                if len > T::zero() {
                    Point::new(dx / len, dy / len)
                } else {
                    jitter_direction(&map.region(a).id, &map.region(b).id)
                }
            };
            let pen = (m - linf) / m;
            let mag = d * pen * pen;
            forces[a].x += dir.x * mag;
            forces[a].y += dir.y * mag;
            forces[b].x -= dir.x * mag;
            forces[b].y -= dir.y * mag;
            let k = T::two() * d * pen / m;
            stiffness[a] += k;
            stiffness[b] += k;
        }
    }
    match cfg.quality {
        QualityForce::Origin => {
            for (r, o) in map.origins().into_iter().enumerate() {
                forces[r].x += (o.x - centers[r].x) / delta;
                forces[r].y += (o.y - centers[r].y) / delta;
                stiffness[r] += T::one() / delta;
            }
        }
        QualityForce::Topology => {
            // each pair is weighted by the mean of the two neighbour counts,
            // so pulls cancel in pairs and the layout cannot drift
            for (a, b) in map.edges() {
                let m = (sides[a] + sides[b]) * T::half();
                let count = T::of((map.neighbors(a).len() + map.neighbors(b).len()) as f64) * T::half();
                // the spring stiffness is kept at contact, where the quadratic
                // disjointness force alone would give a vanishing estimate
                let k = T::one() / (m * count);
                stiffness[a] += k;
                stiffness[b] += k;
                let linf = centers[a].linf(&centers[b]);
                if linf < m {
                    continue;
                }
                let (dx, dy) = (centers[b].x - centers[a].x, centers[b].y - centers[a].y);
                let len = (dx * dx + dy * dy).sqrt();
                if len == T::zero() {
                    continue;
                }
                let mag = (linf - m) / m / count;
                forces[a].x += dx / len * mag;
                forces[a].y += dy / len * mag;
                forces[b].x -= dx / len * mag;
                forces[b].y -= dy / len * mag;
            }
        }
    }
    ForceField { forces, stiffness }
}

fn norm<T: Scalar>(p: &Point<T>) -> T {
    (p.x * p.x + p.y * p.y).sqrt()
}

/// One synchronous update. Returns the new centres and the largest raw
/// force magnitude of the old state.
pub fn force_step<T: Scalar>(
    centers: &[Point<T>],
    sides: &[T],
    map: &AdjacencyGraph<T>,
    cfg: &ForceConfig<T>,
    delta: T,
    damping: T,
) -> (Vec<Point<T>>, T) {
    let field = compute_forces(centers, sides, map, cfg, delta);
    let max_force = field.forces.iter().map(norm).fold(T::zero(), T::max);
    let mut steps: Vec<Point<T>> = match cfg.step {
        StepRule::Direct => field
            .forces
            .iter()
            .map(|f| Point::new(f.x * damping, f.y * damping))
            .collect(),
        StepRule::Preconditioned | StepRule::Inertial => field
            .forces
            .iter()
            .zip(&field.stiffness)
            .map(|(f, &k)| {
                let s = damping / k.max(T::of(1e-12));
                Point::new(f.x * s, f.y * s)
            })
            .collect(),
    };
    let cap = sides.iter().copied().fold(T::infinity(), T::min);
    let largest = steps.iter().map(norm).fold(T::zero(), T::max);
    if largest > cap {
        let s = cap / largest;
        for p in &mut steps {
            p.x *= s;
            p.y *= s;
        }
    }
    let next = centers
        .iter()
        .zip(&steps)
        .map(|(c, s)| Point::new(c.x + s.x, c.y + s.y))
        .collect();
    (next, max_force)
}

/// Damped synchronous steps; the damping shrinks whenever the largest
/// force grows.
fn relax_damped<T: Scalar>(
    mut centers: Vec<Point<T>>,
    sides: &[T],
    map: &AdjacencyGraph<T>,
    cfg: &ForceConfig<T>,
    delta: T,
    limit: T,
) -> (Vec<Point<T>>, usize, bool, T) {
    let mut damping = T::one();
    let mut last = T::infinity();
    let mut iterations = 0;
    loop {
        let field = compute_forces(&centers, sides, map, cfg, delta);
        let max_force = field.forces.iter().map(norm).fold(T::zero(), T::max);
        if max_force < limit || iterations >= cfg.max_iterations {
            return (centers, iterations, max_force < limit, max_force);
        }
        if max_force > last {
            damping = (damping * T::of(0.7)).max(T::of(1e-3));
        } else {
            damping = (damping * T::of(1.02)).min(T::one());
        }
        last = max_force;
        centers = force_step(&centers, sides, map, cfg, delta, damping).0;
        iterations += 1;
    }
}

/// FIRE: velocities are mixed toward the preconditioned force while it keeps
/// doing positive work; otherwise the last half step is undone, the motion
/// stops and the time step halves.
fn relax_inertial<T: Scalar>(
    mut centers: Vec<Point<T>>,
    sides: &[T],
    map: &AdjacencyGraph<T>,
    cfg: &ForceConfig<T>,
    delta: T,
    limit: T,
) -> (Vec<Point<T>>, usize, bool, T) {
    const DT_MAX: f64 = 0.5;
    const ALPHA_START: f64 = 0.1;
    let zero = Point::new(T::zero(), T::zero());
    let cap = sides.iter().copied().fold(T::infinity(), T::min);
    let mut velocity = vec![zero; centers.len()];
    let mut dt = T::of(0.1);
    let mut alpha = T::of(ALPHA_START);
    let mut downhill = 0usize;
    let mut iterations = 0;
    loop {
        let field = compute_forces(&centers, sides, map, cfg, delta);
        let max_force = field.forces.iter().map(norm).fold(T::zero(), T::max);
        if max_force < limit || iterations >= cfg.max_iterations {
            return (centers, iterations, max_force < limit, max_force);
        }
        let g: Vec<Point<T>> = field
            .forces
            .iter()
            .zip(&field.stiffness)
            .map(|(f, &k)| {
                let s = T::one() / k.max(T::of(1e-12));
                Point::new(f.x * s, f.y * s)
            })
            .collect();
        let power: T = g.iter().zip(&velocity).map(|(a, v)| a.x * v.x + a.y * v.y).sum();
        if power > T::zero() {
            let g_norm = g.iter().map(|a| a.x * a.x + a.y * a.y).sum::<T>().sqrt();
            let v_norm = velocity.iter().map(|a| a.x * a.x + a.y * a.y).sum::<T>().sqrt();
            if g_norm > T::zero() {
                let mix = alpha * v_norm / g_norm;
                for (v, a) in velocity.iter_mut().zip(&g) {
                    v.x = (T::one() - alpha) * v.x + mix * a.x;
                    v.y = (T::one() - alpha) * v.y + mix * a.y;
                }
            }
            downhill += 1;
            if downhill > 5 {
                dt = (dt * T::of(1.1)).min(T::of(DT_MAX));
                alpha *= T::of(0.99);
            }
        } else {
            for (c, v) in centers.iter_mut().zip(&velocity) {
                c.x -= T::half() * dt * v.x;
                c.y -= T::half() * dt * v.y;
            }
            velocity.fill(zero);
            downhill = 0;
            dt *= T::half();
            alpha = T::of(ALPHA_START);
        }
        for (v, a) in velocity.iter_mut().zip(&g) {
            v.x += dt * a.x;
            v.y += dt * a.y;
        }
        let mut steps: Vec<Point<T>> = velocity.iter().map(|v| Point::new(v.x * dt, v.y * dt)).collect();
        let largest = steps.iter().map(norm).fold(T::zero(), T::max);
        if largest > cap {
            let s = cap / largest;
            for p in &mut steps {
                p.x *= s;
                p.y *= s;
            }
        }
        for (c, s) in centers.iter_mut().zip(&steps) {
            c.x += s.x;
            c.y += s.y;
        }
        iterations += 1;
    }
}

#[derive(Clone, Debug)]
pub struct FrcResult<T> {
    pub layout: SquareLayout<T>,
    pub iterations: usize,
    pub converged: bool,
    pub max_force: T,
    pub overlap_area: T,
    /// Overlap area relative to the total square area.
    pub overlap_fraction: T,
}

/// Iterates [`force_step`] until the forces vanish or the cap is reached.
pub fn run_frc<T: Scalar>(
    map: &AdjacencyGraph<T>,
    sides: &[T],
    function_index: usize,
    cfg: &ForceConfig<T>,
    previous: Option<&SquareLayout<T>>,
) -> FrcResult<T> {
    let delta = origin_diagonal(map).max(T::of(1e-12));
    let centers = match (cfg.init, previous) {
        (ForceInit::PreviousLayout, Some(p)) => p.centers.clone(),
        _ => map.origins(),
    };
    let min_side = sides.iter().copied().fold(T::infinity(), T::min);
    let limit = cfg.threshold * min_side;
    let (centers, iterations, converged, max_force) = match cfg.step {
        StepRule::Inertial => relax_inertial(centers, sides, map, cfg, delta, limit),
        _ => relax_damped(centers, sides, map, cfg, delta, limit),
    };
    let layout = SquareLayout {
        ids: map.regions().iter().map(|r| r.id.clone()).collect(),
        centers,
        sides: sides.to_vec(),
        function_index,
        constraint_ref: 0,
    };
    let overlap_area = layout.overlap_area();
    let total: T = sides.iter().map(|&s| s * s).sum();
    let overlap_fraction = overlap_area / total;
    if overlap_fraction > T::of(1e-3) {
        warn!("force layout leaves {:.3}% overlap", overlap_fraction.as_f64() * 100.0);
    }
    FrcResult {
        layout,
        iterations,
        converged,
        max_force,
        overlap_area,
        overlap_fraction,
    }
}
