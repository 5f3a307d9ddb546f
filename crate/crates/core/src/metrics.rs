//! Cartogram quality and stability scores, each normalised to `[0, 1]`.
//!
//! Quality: lost adjacencies (`madj`), relative-position change against the
//! map (`mrel`) and displacement from origins (`mdis`). Stability between
//! two layouts: rectangle distance (`sdis`) and relative-position change
//! (`srel`).

use log::warn;
use serde::{Deserialize, Serialize};

use crate::geometry::Rect;
use crate::layout::SquareLayout;
use crate::mapdata::{AdjacencyGraph, WeightKind};
use crate::Scalar;

/// Area fractions in the zones N, NE, E, SE, S, SW, W, NW.
pub type ZoneVector<T> = [T; 8];

/// Fractions of `other` lying in the eight zones around `reference`.
///
/// The part of `other` inside `reference`'s own cell is ignored and the
/// rest renormalised; when nothing remains the vector is uniform.
/// Returns `None` for rectangles without area.
pub fn zone_vector<T: Scalar>(reference: &Rect<T>, other: &Rect<T>) -> Option<ZoneVector<T>> {
    if !(reference.area() > T::zero()) || !(other.area() > T::zero()) {
        return None;
    }
    let span = |lo: T, hi: T, a: T, b: T| -> [T; 3] {
        let below = (hi.min(a) - lo).max(T::zero());
        let mid = (hi.min(b) - lo.max(a)).max(T::zero());
        let above = (hi - lo.max(b)).max(T::zero());
        [below, mid, above]
    };
    let xs = span(other.min.x, other.max.x, reference.min.x, reference.max.x);
    let ys = span(other.min.y, other.max.y, reference.min.y, reference.max.y);
    // (column, row) for each zone; column 0 = west, row 2 = north
    const CELLS: [(usize, usize); 8] = [(1, 2), (2, 2), (2, 1), (2, 0), (1, 0), (0, 0), (0, 1), (0, 2)];
    let mut v = CELLS.map(|(c, r)| xs[c] * ys[r]);
    let total: T = v.iter().copied().sum();
    if total > T::zero() {
        for f in &mut v {
            *f /= total;
        }
    } else {
        v = [T::of(0.125); 8];
    }
    Some(v)
}

fn zone_difference<T: Scalar>(p: &ZoneVector<T>, q: &ZoneVector<T>) -> T {
    p.iter().zip(q).map(|(a, b)| (*a - *b).abs()).sum::<T>() * T::half()
}

fn clamp_unit<T: Scalar>(name: &str, v: T) -> T {
    let slack = T::of(1e-9);
    if v < -slack || v > T::one() + slack {
        warn!("{name} = {v} outside [0, 1]; clamped");
    }
    v.max(T::zero()).min(T::one())
}

fn relative_change<T: Scalar>(a: &[Rect<T>], b: &[Rect<T>]) -> T {
    let n = a.len();
    if n < 2 {
        return T::zero();
    }
    let mut sum = T::zero();
    for r in 0..n {
        for q in 0..n {
            if r == q {
                continue;
            }
            let za = zone_vector(&a[r], &a[q]).unwrap_or([T::of(0.125); 8]);
            let zb = zone_vector(&b[r], &b[q]).unwrap_or([T::of(0.125); 8]);
            sum += zone_difference(&za, &zb);
        }
    }
    sum / T::of((n * (n - 1)) as f64)
}

fn squares<T: Scalar>(l: &SquareLayout<T>) -> Vec<Rect<T>> {
    (0..l.len()).map(|r| l.square(r)).collect()
}

/// Map adjacencies whose squares do not touch in `layout`.
pub fn lost_adjacencies<T: Scalar>(layout: &SquareLayout<T>, map: &AdjacencyGraph<T>) -> Vec<(usize, usize)> {
    let tol = map.diagonal() * T::of(1e-6);
    map.edges().filter(|&(a, b)| layout.l1_gap(a, b) > tol).collect()
}

/// Lost adjacencies over all layouts divided by `k · |T|`.
pub fn madj<T: Scalar>(layouts: &[SquareLayout<T>], map: &AdjacencyGraph<T>) -> T {
    let edges = map.edge_count();
    if edges == 0 || layouts.is_empty() {
        return T::zero();
    }
    let lost: usize = layouts.iter().map(|l| lost_adjacencies(l, map).len()).sum();
    clamp_unit("madj", T::of(lost as f64 / (edges * layouts.len()) as f64))
}

/// Relative-position change of one layout against the map bounding boxes.
pub fn mrel_single<T: Scalar>(layout: &SquareLayout<T>, map: &AdjacencyGraph<T>) -> T {
    let boxes: Vec<Rect<T>> = map.regions().iter().map(|r| r.bbox()).collect();
    clamp_unit("mrel", relative_change(&boxes, &squares(layout)))
}

pub fn mrel<T: Scalar>(layouts: &[SquareLayout<T>], map: &AdjacencyGraph<T>) -> T {
    mean(layouts.iter().map(|l| mrel_single(l, map)))
}

pub fn srel<T: Scalar>(a: &SquareLayout<T>, b: &SquareLayout<T>) -> T {
    clamp_unit("srel", relative_change(&squares(a), &squares(b)))
}

/// Mean L1 displacement from origins over width plus height of the map.
pub fn mdis_single<T: Scalar>(layout: &SquareLayout<T>, map: &AdjacencyGraph<T>) -> T {
    let bb = map.bbox();
    let norm = bb.width() + bb.height();
    if layout.is_empty() || norm <= T::zero() {
        return T::zero();
    }
    let total: T = layout.centers.iter().zip(map.origins()).map(|(c, o)| c.l1(&o)).sum();
    clamp_unit("mdis", total / T::of(layout.len() as f64) / norm)
}

pub fn mdis<T: Scalar>(layouts: &[SquareLayout<T>], map: &AdjacencyGraph<T>) -> T {
    mean(layouts.iter().map(|l| mdis_single(l, map)))
}

/// Mean rectangle distance between corresponding squares, over the larger
/// width plus height of the two layouts.
pub fn sdis<T: Scalar>(a: &SquareLayout<T>, b: &SquareLayout<T>) -> T {
    if a.is_empty() {
        return T::zero();
    }
    let (ba, bb) = (a.bbox(), b.bbox());
    let norm = (ba.width() + ba.height()).max(bb.width() + bb.height());
    if norm <= T::zero() {
        return T::zero();
    }
    let total: T = (0..a.len())
        .map(|r| {
            let dx = a.centers[r].x - b.centers[r].x;
            let dy = a.centers[r].y - b.centers[r].y;
            let ds = a.sides[r] - b.sides[r];
            (dx * dx + dy * dy + T::two() * ds * ds).sqrt()
        })
        .sum();
    clamp_unit("sdis", total / T::of(a.len() as f64) / norm)
}

fn mean<T: Scalar>(it: impl Iterator<Item = T>) -> T {
    let (mut s, mut n) = (T::zero(), 0usize);
    for v in it {
        s += v;
        n += 1;
    }
    if n == 0 {
        T::zero()
    } else {
        s / T::of(n as f64)
    }
}

/// Layout pairs compared by the stability metrics: consecutive ones for a
/// time series, every pair for unordered weight vectors.
pub fn stability_pairs(kind: WeightKind, k: usize) -> Vec<(usize, usize)> {
    match kind {
        WeightKind::TimeSeries => (1..k).map(|i| (i - 1, i)).collect(),
        WeightKind::WeightVectors => (0..k).flat_map(|i| (i + 1..k).map(move |j| (i, j))).collect(),
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub schema_version: u32,
    pub madj: Vec<f64>,
    pub mrel: Vec<f64>,
    pub mdis: Vec<f64>,
    pub lost: Vec<usize>,
    pub pairs: Vec<(usize, usize)>,
    pub sdis: Vec<f64>,
    pub srel: Vec<f64>,
    pub avg_madj: f64,
    pub avg_mrel: f64,
    pub avg_mdis: f64,
    pub avg_sdis: f64,
    pub avg_srel: f64,
}

pub fn evaluate<T: Scalar>(layouts: &[SquareLayout<T>], map: &AdjacencyGraph<T>, pairs: &[(usize, usize)]) -> MetricsReport {
    let f = |v: T| v.as_f64();
    let madj_each: Vec<f64> = layouts.iter().map(|l| f(madj(std::slice::from_ref(l), map))).collect();
    let mrel_each: Vec<f64> = layouts.iter().map(|l| f(mrel_single(l, map))).collect();
    let mdis_each: Vec<f64> = layouts.iter().map(|l| f(mdis_single(l, map))).collect();
    let lost = layouts.iter().map(|l| lost_adjacencies(l, map).len()).collect();
    let sdis_each: Vec<f64> = pairs.iter().map(|&(i, j)| f(sdis(&layouts[i], &layouts[j]))).collect();
    let srel_each: Vec<f64> = pairs.iter().map(|&(i, j)| f(srel(&layouts[i], &layouts[j]))).collect();
    let avg = |v: &[f64]| if v.is_empty() { 0.0 } else { v.iter().sum::<f64>() / v.len() as f64 };
    MetricsReport {
        schema_version: crate::layout::SCHEMA_VERSION,
        avg_madj: avg(&madj_each),
        avg_mrel: avg(&mrel_each),
        avg_mdis: avg(&mdis_each),
        avg_sdis: avg(&sdis_each),
        avg_srel: avg(&srel_each),
        madj: madj_each,
        mrel: mrel_each,
        mdis: mdis_each,
        lost,
        pairs: pairs.to_vec(),
        sdis: sdis_each,
        srel: srel_each,
    }
}

/// One line of the experiment table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub dataset: String,
    pub variant: String,
    pub status: String,
    pub madj: f64,
    pub mrel: f64,
    pub mdis: f64,
    pub sdis: f64,
    pub srel: f64,
    pub lost: usize,
}

impl MetricsRow {
    pub fn from_report(dataset: &str, variant: &str, status: &str, r: &MetricsReport) -> Self {
        MetricsRow {
            dataset: dataset.into(),
            variant: variant.into(),
            status: status.into(),
            madj: r.avg_madj,
            mrel: r.avg_mrel,
            mdis: r.avg_mdis,
            sdis: r.avg_sdis,
            srel: r.avg_srel,
            lost: r.lost.iter().sum(),
        }
    }

    pub fn failed(dataset: &str, variant: &str, status: &str) -> Self {
        MetricsRow {
            dataset: dataset.into(),
            variant: variant.into(),
            status: status.into(),
            madj: f64::NAN,
            mrel: f64::NAN,
            mdis: f64::NAN,
            sdis: f64::NAN,
            srel: f64::NAN,
            lost: 0,
        }
    }
}
