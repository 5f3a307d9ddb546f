//! Seeded synthetic benchmark: jittered grid maps with log-normal weights.

use anyhow::{Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};
use serde_json::json;

use demers::mapdata::{parse_map, parse_weights, WeightKind};
use demers::{AdjacencyGraph, WeightSet};

#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub rows: usize,
    pub cols: usize,
    /// Number of weight functions.
    pub k: usize,
    pub kind: WeightKind,
    /// Grid cell size in map units.
    pub cell: f64,
    /// Interior vertex displacement as a fraction of the cell.
    pub jitter: f64,
    /// Shape parameter of the base log-normal weights.
    pub sigma: f64,
    /// Per-step log-normal drift of a time series.
    pub drift: f64,
}

impl GridSpec {
    pub fn square(n: usize) -> Self {
        GridSpec {
            rows: n,
            cols: n,
            k: 4,
            kind: WeightKind::TimeSeries,
            cell: 100.0,
            jitter: 0.3,
            sigma: 0.6,
            drift: 0.25,
        }
    }
}

/// A generated map and weights, in parsed and file form.
#[derive(Clone, Debug)]
pub struct Instance {
    pub name: String,
    pub map: AdjacencyGraph,
    pub weights: WeightSet,
    pub geojson: String,
    pub csv: String,
}

fn region_id(r: usize, c: usize) -> String {
    format!("r{r:02}c{c:02}")
}

pub fn grid_instance(spec: &GridSpec, seed: u64) -> Result<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (rows, cols) = (spec.rows, spec.cols);
    // shared vertex grid; boundary vertices stay put so the outline is a rectangle
    let mut verts = vec![vec![[0.0f64; 2]; cols + 1]; rows + 1];
    for (i, row) in verts.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            let interior_x = j > 0 && j < cols;
            let interior_y = i > 0 && i < rows;
            let jx = if interior_x { rng.gen_range(-spec.jitter..=spec.jitter) } else { 0.0 };
            let jy = if interior_y { rng.gen_range(-spec.jitter..=spec.jitter) } else { 0.0 };
            *v = [(j as f64 + jx) * spec.cell, (i as f64 + jy) * spec.cell];
        }
    }
    let mut features = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            let ring = vec![verts[i][j], verts[i][j + 1], verts[i + 1][j + 1], verts[i + 1][j], verts[i][j]];
            features.push(json!({
                "type": "Feature",
                "properties": { "id": region_id(i, j) },
                "geometry": { "type": "Polygon", "coordinates": [ring] },
            }));
        }
    }
    let geojson = serde_json::to_string_pretty(&json!({ "type": "FeatureCollection", "features": features }))?;

    let base = LogNormal::new(0.0, spec.sigma).context("bad sigma")?;
    let step = LogNormal::new(0.0, spec.drift).context("bad drift")?;
    let n = rows * cols;
    let mut values: Vec<Vec<f64>> = Vec::with_capacity(spec.k);
    for f in 0..spec.k {
        let col: Vec<f64> = match (spec.kind, f) {
            (WeightKind::TimeSeries, 0) | (WeightKind::WeightVectors, _) => (0..n).map(|_| base.sample(&mut rng)).collect(),
            (WeightKind::TimeSeries, _) => values[f - 1].iter().map(|v| v * step.sample(&mut rng)).collect(),
        };
        values.push(col);
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["region_id", "function_name", "value"])?;
    for (f, col) in values.iter().enumerate() {
        for (r, v) in col.iter().enumerate() {
            w.write_record([region_id(r / cols, r % cols), format!("t{f}"), v.to_string()])?;
        }
    }
    let csv = String::from_utf8(w.into_inner()?)?;

    let map = parse_map(&geojson)?;
    let weights = parse_weights(&csv, &map, spec.kind)?;
    Ok(Instance {
        name: format!("grid{rows}x{cols}_s{seed}"),
        map,
        weights,
        geojson,
        csv,
    })
}
