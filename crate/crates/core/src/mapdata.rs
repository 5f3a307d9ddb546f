//! Map ingestion: regions, adjacencies, weight tables and square side lengths.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use geojson::{GeoJson, GeometryValue};
use thiserror::Error;

use crate::geometry::{Point, Rect};
use crate::Scalar;

#[derive(Debug, Error)]
pub enum MapError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("parse failure: {0}")]
    Parse(String),
    #[error("feature {0} has no string id")]
    MissingId(usize),
    #[error("duplicate id {0:?}")]
    DuplicateId(String),
    #[error("region {0:?} has an unsupported or missing geometry")]
    UnsupportedGeometry(String),
    #[error("degenerate polygon for region {0:?} (zero area)")]
    DegeneratePolygon(String),
    #[error("map has no regions")]
    Empty,
    #[error("edge references unknown region index {0}")]
    BadEdge(usize),
    #[error("self-loop on region {0:?}")]
    SelfLoop(String),
    #[error("unknown region id {0:?}")]
    UnknownRegion(String),
    #[error("nonpositive value {value} for region {region:?} in function {function:?}")]
    NonPositiveValue {
        region: String,
        function: String,
        value: f64,
    },
    #[error("missing value for region {region:?} in function {function:?}")]
    MissingCell { region: String, function: String },
    #[error("duplicate value for region {region:?} in function {function:?}")]
    DuplicateCell { region: String, function: String },
    #[error("weight table has no functions")]
    NoFunctions,
}

pub type Ring<T> = Vec<Point<T>>;

/// A map region with its (possibly multi-part) boundary and centroid.
#[derive(Clone, Debug, PartialEq)]
pub struct Region<T> {
    pub id: String,
    /// All rings of all parts; outer rings and holes alike.
    pub polygon: Vec<Ring<T>>,
    pub centroid: Point<T>,
}

impl<T: Scalar> Region<T> {
    /// Anchor for displacement terms; the geographic centroid.
    pub fn origin(&self) -> Point<T> {
        self.centroid
    }

    pub fn bbox(&self) -> Rect<T> {
        Rect::bounding(self.polygon.iter().flatten()).unwrap_or(Rect::new(self.centroid, self.centroid))
    }
}

/// Regions plus the undirected adjacency relation `T`.
#[derive(Clone, Debug)]
pub struct AdjacencyGraph<T> {
    regions: Vec<Region<T>>,
    edges: BTreeSet<(usize, usize)>,
    index: HashMap<String, usize>,
}

impl<T: Scalar> AdjacencyGraph<T> {
    /// Builds a graph from explicit edges given as region index pairs.
    pub fn new(regions: Vec<Region<T>>, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, MapError> {
        if regions.is_empty() {
            return Err(MapError::Empty);
        }
        let mut index = HashMap::with_capacity(regions.len());
        for (i, r) in regions.iter().enumerate() {
            if index.insert(r.id.clone(), i).is_some() {
                return Err(MapError::DuplicateId(r.id.clone()));
            }
        }
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a >= regions.len() {
                return Err(MapError::BadEdge(a));
            }
            if b >= regions.len() {
                return Err(MapError::BadEdge(b));
            }
            if a == b {
                return Err(MapError::SelfLoop(regions[a].id.clone()));
            }
            set.insert((a.min(b), a.max(b)));
        }
        Ok(AdjacencyGraph {
            regions,
            edges: set,
            index,
        })
    }

    /// Builds a graph whose edges are the region pairs sharing a boundary
    /// segment of positive length.
    pub fn from_regions(regions: Vec<Region<T>>) -> Result<Self, MapError> {
        let edges = shared_boundary_edges(&regions);
        Self::new(regions, edges)
    }

    pub fn regions(&self) -> &[Region<T>] {
        &self.regions
    }

    pub fn region(&self, i: usize) -> &Region<T> {
        &self.regions[i]
    }

    pub fn len(&self) -> usize {
        self.regions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }

    /// Edges as `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_adjacent(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// Edges as unordered id pairs, independent of region order.
    pub fn edge_ids(&self) -> BTreeSet<(String, String)> {
        self.edges
            .iter()
            .map(|&(a, b)| {
                let (x, y) = (&self.regions[a].id, &self.regions[b].id);
                if x <= y {
                    (x.clone(), y.clone())
                } else {
                    (y.clone(), x.clone())
                }
            })
            .collect()
    }

    pub fn neighbors(&self, r: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == r {
                    Some(b)
                } else if b == r {
                    Some(a)
                } else {
                    None
                }
            })
            .collect()
    }

    /// Bounding box of all input polygons.
    pub fn bbox(&self) -> Rect<T> {
        self.regions
            .iter()
            .map(|r| r.bbox())
            .reduce(|a, b| a.union(&b))
            .expect("non-empty map")
    }

    /// L2 diagonal of the map bounding box.
    pub fn diagonal(&self) -> T {
        self.bbox().diagonal()
    }

    pub fn origins(&self) -> Vec<Point<T>> {
        self.regions.iter().map(|r| r.origin()).collect()
    }
}

pub fn load_map<T: Scalar>(path: impl AsRef<Path>) -> Result<AdjacencyGraph<T>, MapError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| MapError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_map(&text)
}

/// Parses a GeoJSON FeatureCollection of Polygon / MultiPolygon features.
///
/// The region id is taken from `properties.id`, then the feature `id`
/// member, then `properties.name`.
pub fn parse_map<T: Scalar>(text: &str) -> Result<AdjacencyGraph<T>, MapError> {
    let gj = GeoJson::from_str(text).map_err(|e| MapError::Parse(e.to_string()))?;
    let fc = match gj {
        GeoJson::FeatureCollection(fc) => fc,
        _ => return Err(MapError::Parse("expected a FeatureCollection".into())),
    };
    let mut regions = Vec::with_capacity(fc.features.len());
    for (fi, feature) in fc.features.iter().enumerate() {
        let id = feature_id(feature).ok_or(MapError::MissingId(fi))?;
        let parts: Vec<Vec<Ring<f64>>> = match feature.geometry.as_ref().map(|g| &g.value) {
            Some(GeometryValue::Polygon { coordinates }) => vec![convert_polygon(coordinates)],
            Some(GeometryValue::MultiPolygon { coordinates }) => {
                coordinates.iter().map(|p| convert_polygon(p)).collect()
            }
            _ => return Err(MapError::UnsupportedGeometry(id)),
        };
        regions.push(region_from_parts(id, parts)?);
    }
    AdjacencyGraph::from_regions(regions)
}

fn feature_id(feature: &geojson::Feature) -> Option<String> {
    let prop = |key: &str| {
        feature.properties.as_ref().and_then(|p| match p.get(key) {
            Some(serde_json::Value::String(s)) => Some(s.clone()),
            Some(serde_json::Value::Number(n)) => Some(n.to_string()),
            _ => None,
        })
    };
    prop("id")
        .or_else(|| match &feature.id {
            Some(geojson::feature::Id::String(s)) => Some(s.clone()),
            Some(geojson::feature::Id::Number(n)) => Some(n.to_string()),
            None => None,
        })
        .or_else(|| prop("name"))
}

fn convert_polygon(rings: &[Vec<geojson::Position>]) -> Vec<Ring<f64>> {
    rings
        .iter()
        .map(|ring| {
            let mut pts: Vec<Point<f64>> = ring.iter().map(|p| Point::new(p[0], p[1])).collect();
            // closing vertex is implied
            if pts.len() > 1 && pts.first() == pts.last() {
                pts.pop();
            }
            pts
        })
        .collect()
}

/// Builds a region from polygon parts, each a list of rings with the outer
/// ring first. The centroid is the area-weighted centroid of the largest part.
pub fn region_from_parts<T: Scalar>(id: String, parts: Vec<Vec<Ring<f64>>>) -> Result<Region<T>, MapError> {
    let mut best: Option<(f64, Point<f64>)> = None;
    for part in &parts {
        let Some((outer, holes)) = part.split_first() else {
            continue;
        };
        let (a0, c0) = ring_moments(outer);
        let mut area = a0.abs();
        let mut mx = c0.x * a0.abs();
        let mut my = c0.y * a0.abs();
        for hole in holes {
            let (ah, ch) = ring_moments(hole);
            area -= ah.abs();
            mx -= ch.x * ah.abs();
            my -= ch.y * ah.abs();
        }
        if area > 0.0 && best.is_none_or(|(a, _)| area > a) {
            best = Some((area, Point::new(mx / area, my / area)));
        }
    }
    let scale = parts
        .iter()
        .flatten()
        .flatten()
        .fold(0.0f64, |m, p| m.max(p.x.abs()).max(p.y.abs()))
        .max(1.0);
    let (area, centroid) = best.ok_or_else(|| MapError::DegeneratePolygon(id.clone()))?;
    if area <= 1e-12 * scale * scale {
        return Err(MapError::DegeneratePolygon(id));
    }
    let polygon = parts
        .into_iter()
        .flatten()
        .map(|ring| ring.into_iter().map(|p| Point::new(T::of(p.x), T::of(p.y))).collect())
        .collect();
    Ok(Region {
        id,
        polygon,
        centroid: Point::new(T::of(centroid.x), T::of(centroid.y)),
    })
}

/// Signed area and centroid of a simple ring (shoelace formula).
fn ring_moments(ring: &[Point<f64>]) -> (f64, Point<f64>) {
    let n = ring.len();
    if n < 3 {
        return (0.0, Point::new(0.0, 0.0));
    }
    // shift to the first vertex to limit cancellation
    let o = ring[0];
    let (mut a, mut cx, mut cy) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let p = ring[i];
        let q = ring[(i + 1) % n];
        let (px, py, qx, qy) = (p.x - o.x, p.y - o.y, q.x - o.x, q.y - o.y);
        let cross = px * qy - qx * py;
        a += cross;
        cx += (px + qx) * cross;
        cy += (py + qy) * cross;
    }
    a *= 0.5;
    if a == 0.0 {
        return (0.0, o);
    }
    (a, Point::new(o.x + cx / (6.0 * a), o.y + cy / (6.0 * a)))
}

/// Pairs of regions sharing a boundary segment longer than a snapping
/// tolerance of `1e-9` times the map diagonal.
fn shared_boundary_edges<T: Scalar>(regions: &[Region<T>]) -> Vec<(usize, usize)> {
    let segs: Vec<Vec<(Point<f64>, Point<f64>)>> = regions
        .iter()
        .map(|r| {
            r.polygon
                .iter()
                .flat_map(|ring| {
                    let n = ring.len();
                    (0..n).map(move |i| {
                        let (p, q) = (ring[i], ring[(i + 1) % n]);
                        (Point::new(p.x.as_f64(), p.y.as_f64()), Point::new(q.x.as_f64(), q.y.as_f64()))
                    })
                })
                .collect()
        })
        .collect();
    let boxes: Vec<Rect<T>> = regions.iter().map(|r| r.bbox()).collect();
    let diag = boxes
        .iter()
        .copied()
        .reduce(|a, b| a.union(&b))
        .map(|b| b.diagonal().as_f64())
        .unwrap_or(0.0);
    let tol = 1e-9 * diag.max(f64::MIN_POSITIVE);
    let mut edges = Vec::new();
    for i in 0..regions.len() {
        for j in i + 1..regions.len() {
            let (a, b) = (&boxes[i], &boxes[j]);
            let t = T::of(tol);
            if a.min.x > b.max.x + t || b.min.x > a.max.x + t || a.min.y > b.max.y + t || b.min.y > a.max.y + t {
                continue;
            }
            let touching = segs[i]
                .iter()
                .any(|s| segs[j].iter().any(|u| collinear_overlap(s, u, tol) > tol));
            if touching {
                edges.push((i, j));
            }
        }
    }
    edges
}

/// Length of the common part of two segments if they are collinear within
/// `tol`, else zero.
fn collinear_overlap(s: &(Point<f64>, Point<f64>), u: &(Point<f64>, Point<f64>), tol: f64) -> f64 {
    let (dx, dy) = (s.1.x - s.0.x, s.1.y - s.0.y);
    let len = dx.hypot(dy);
    if len <= tol {
        return 0.0;
    }
    let (ux, uy) = (dx / len, dy / len);
    let off = |p: &Point<f64>| ((p.x - s.0.x) * uy - (p.y - s.0.y) * ux).abs();
    if off(&u.0) > tol || off(&u.1) > tol {
        return 0.0;
    }
    let proj = |p: &Point<f64>| (p.x - s.0.x) * ux + (p.y - s.0.y) * uy;
    let (a, b) = (proj(&u.0), proj(&u.1));
    let (lo, hi) = (a.min(b), a.max(b));
    (hi.min(len) - lo.max(0.0)).max(0.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum WeightKind {
    /// Ordered snapshots of one quantity; one global scale factor.
    TimeSeries,
    /// Unrelated quantities; one scale factor per function.
    WeightVectors,
}

impl FromStr for WeightKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "time-series" | "timeseries" | "ts" => Ok(WeightKind::TimeSeries),
            "weight-vectors" | "weightvectors" | "wv" => Ok(WeightKind::WeightVectors),
            other => Err(format!("unknown weight kind {other:?}")),
        }
    }
}

impl fmt::Display for WeightKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WeightKind::TimeSeries => "time-series",
            WeightKind::WeightVectors => "weight-vectors",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightFunction<T> {
    pub name: String,
    /// One strictly positive value per region, in map order.
    pub values: Vec<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightSet<T> {
    pub functions: Vec<WeightFunction<T>>,
    pub kind: WeightKind,
}

impl<T: Scalar> WeightSet<T> {
    /// Validates positivity and coverage against `map`.
    pub fn new(functions: Vec<WeightFunction<T>>, kind: WeightKind, map: &AdjacencyGraph<T>) -> Result<Self, MapError> {
        if functions.is_empty() {
            return Err(MapError::NoFunctions);
        }
        for f in &functions {
            if f.values.len() != map.len() {
                let region = map.regions().get(f.values.len()).map(|r| r.id.clone()).unwrap_or_default();
                return Err(MapError::MissingCell {
                    region,
                    function: f.name.clone(),
                });
            }
            for (r, v) in f.values.iter().enumerate() {
                if !(*v > T::zero()) || !v.is_finite() {
                    return Err(MapError::NonPositiveValue {
                        region: map.region(r).id.clone(),
                        function: f.name.clone(),
                        value: v.as_f64(),
                    });
                }
            }
        }
        Ok(WeightSet { functions, kind })
    }

    pub fn k(&self) -> usize {
        self.functions.len()
    }
}

#[derive(serde::Deserialize)]
struct WeightRow {
    region_id: String,
    function_name: String,
    value: f64,
}

pub fn load_weights<T: Scalar>(
    path: impl AsRef<Path>,
    map: &AdjacencyGraph<T>,
    kind: WeightKind,
) -> Result<WeightSet<T>, MapError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| MapError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_weights(&text, map, kind)
}

/// Parses `region_id,function_name,value` rows (header required).
pub fn parse_weights<T: Scalar>(text: &str, map: &AdjacencyGraph<T>, kind: WeightKind) -> Result<WeightSet<T>, MapError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut names: Vec<String> = Vec::new();
    let mut cells: Vec<Vec<Option<T>>> = Vec::new();
    for row in reader.deserialize::<WeightRow>() {
        let row = row.map_err(|e| MapError::Parse(e.to_string()))?;
        let r = map
            .index_of(&row.region_id)
            .ok_or_else(|| MapError::UnknownRegion(row.region_id.clone()))?;
        if !(row.value > 0.0) || !row.value.is_finite() {
            return Err(MapError::NonPositiveValue {
                region: row.region_id,
                function: row.function_name,
                value: row.value,
            });
        }
        let f = match names.iter().position(|n| *n == row.function_name) {
            Some(f) => f,
            None => {
                names.push(row.function_name.clone());
                cells.push(vec![None; map.len()]);
                names.len() - 1
            }
        };
        if cells[f][r].replace(T::of(row.value)).is_some() {
            return Err(MapError::DuplicateCell {
                region: row.region_id,
                function: row.function_name,
            });
        }
    }
    let mut functions = Vec::with_capacity(names.len());
    for (name, col) in names.into_iter().zip(cells) {
        let mut values = Vec::with_capacity(col.len());
        for (r, v) in col.into_iter().enumerate() {
            values.push(v.ok_or_else(|| MapError::MissingCell {
                region: map.region(r).id.clone(),
                function: name.clone(),
            })?);
        }
        functions.push(WeightFunction { name, values });
    }
    WeightSet::new(functions, kind, map)
}

/// How a data value becomes a square side length.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum SideMapping {
    /// Side length proportional to the value.
    #[default]
    SideLength,
    /// Square area proportional to the value.
    AreaProportional,
}

/// Square side length per (function, region), plus the map diagonal used
/// for scaling.
#[derive(Clone, Debug, PartialEq)]
pub struct SideLengthTable<T> {
    sides: Vec<Vec<T>>,
    pub diagonal: T,
}

impl<T: Scalar> SideLengthTable<T> {
    pub fn new(sides: Vec<Vec<T>>, diagonal: T) -> Self {
        assert!(!sides.is_empty(), "side table needs at least one function");
        assert!(
            sides.iter().flatten().all(|s| *s > T::zero()),
            "side lengths must be strictly positive"
        );
        SideLengthTable { sides, diagonal }
    }

    pub fn k(&self) -> usize {
        self.sides.len()
    }

    pub fn side(&self, function: usize, region: usize) -> T {
        self.sides[function][region]
    }

    pub fn function(&self, function: usize) -> &[T] {
        &self.sides[function]
    }

    pub fn min_side(&self) -> T {
        self.sides.iter().flatten().copied().fold(T::infinity(), T::min)
    }

    pub fn max_side(&self) -> T {
        self.sides.iter().flatten().copied().fold(T::zero(), T::max)
    }
}

pub fn scale_weights<T: Scalar>(weights: &WeightSet<T>, map: &AdjacencyGraph<T>, mapping: SideMapping) -> SideLengthTable<T> {
    scale_weights_with_diagonal(weights, map.diagonal(), mapping)
}

/// Scales so the largest side is a quarter of `diagonal`: globally for time
/// series, per function for weight vectors.
pub fn scale_weights_with_diagonal<T: Scalar>(weights: &WeightSet<T>, diagonal: T, mapping: SideMapping) -> SideLengthTable<T> {
    let raw: Vec<Vec<T>> = weights
        .functions
        .iter()
        .map(|f| {
            f.values
                .iter()
                .map(|&v| match mapping {
                    SideMapping::SideLength => v,
                    SideMapping::AreaProportional => v.sqrt(),
                })
                .collect()
        })
        .collect();
    let target = diagonal / T::of(4.0);
    let max_of = |f: &[T]| f.iter().copied().fold(T::zero(), T::max);
    let sides = match weights.kind {
        WeightKind::TimeSeries => {
            let m = raw.iter().map(|f| max_of(f)).fold(T::zero(), T::max);
            let c = target / m;
            raw.iter().map(|f| f.iter().map(|&v| v * c).collect()).collect()
        }
        WeightKind::WeightVectors => raw
            .iter()
            .map(|f| {
                let c = target / max_of(f);
                f.iter().map(|&v| v * c).collect()
            })
            .collect(),
    };
    SideLengthTable::new(sides, diagonal)
}

/// Gap between nonadjacent squares: the smallest side, capped at 5% of the
/// map diagonal.
pub fn compute_epsilon<T: Scalar>(table: &SideLengthTable<T>) -> T {
    table.min_side().min(T::of(0.05) * table.diagonal)
}
