//! Scattered-data interpolation and riverbed cross-sections.
//!
//! Point measurements from a survey become spatially continuous products two
//! ways: a Delaunay triangulation with barycentric (piecewise-linear)
//! interpolation onto a regular raster, and a sliding-window average along a
//! transect chord for 1D riverbed profiles.

mod delaunay;
pub(crate) mod predicates;
mod raster;
mod section;
#[cfg(test)]
pub(crate) mod test_support;

pub use delaunay::{triangulate, Triangulation};
pub use raster::{rasterize, rasterize_sequential, RasterGrid, NODATA};
pub use section::{
    chord_project, cross_section, ChordProjection, CrossSectionProfile, DEFAULT_WINDOW_M,
};

use thiserror::Error;

use crate::geo::LocalPoint;

/// Two scatter points closer than this (in both axes) are treated as repeated
/// measurements of the same spot and merged before triangulation.
pub const DUPLICATE_MERGE_TOL_M: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum InterpError {
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("duplicate point at ({x}, {y})")]
    DuplicatePoint { x: f64, y: f64 },
    #[error("empty input: {0}")]
    EmptyInput(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Scattered measurements: positions with one value each.
///
/// Construction merges near-duplicate positions (within
/// [`DUPLICATE_MERGE_TOL_M`]) by averaging their values, then requires at
/// least three non-collinear points so a triangulation exists.
#[derive(Debug, Clone)]
pub struct ScatterSet {
    points: Vec<LocalPoint>,
    values: Vec<f64>,
}

impl ScatterSet {
    pub fn new(points: Vec<LocalPoint>, values: Vec<f64>) -> Result<Self, InterpError> {
        if points.len() != values.len() {
            return Err(InterpError::InvalidParameter(format!(
                "{} points but {} values",
                points.len(),
                values.len()
            )));
        }
        if points.is_empty() {
            return Err(InterpError::EmptyInput("no scatter points".into()));
        }
        let (points, values) = merge_duplicates(points, values);
        if points.len() < 3 {
            return Err(InterpError::Degenerate(format!(
                "only {} distinct points after merging",
                points.len()
            )));
        }
        Ok(ScatterSet { points, values })
    }

    pub fn points(&self) -> &[LocalPoint] {
        &self.points
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Clusters points within [`DUPLICATE_MERGE_TOL_M`] of a cluster seed and
/// averages their values. Order of first appearance is preserved.
fn merge_duplicates(points: Vec<LocalPoint>, values: Vec<f64>) -> (Vec<LocalPoint>, Vec<f64>) {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| {
        (points[i].x, points[i].y)
            .partial_cmp(&(points[j].x, points[j].y))
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    // cluster id per input index, assigned along the sorted sweep
    let mut cluster_of = vec![usize::MAX; points.len()];
    let mut seeds: Vec<(usize, LocalPoint)> = Vec::new(); // (first input index, seed point)
    for &i in &order {
        let p = points[i];
        let found = seeds
            .iter()
            .rev()
            .take_while(|(_, s)| (p.x - s.x) <= DUPLICATE_MERGE_TOL_M)
            .find(|(_, s)| {
                (p.x - s.x).abs() <= DUPLICATE_MERGE_TOL_M
                    && (p.y - s.y).abs() <= DUPLICATE_MERGE_TOL_M
            });
        match found {
            Some(&(first, _)) => cluster_of[i] = cluster_of[first],
            None => {
                cluster_of[i] = seeds.len();
                seeds.push((i, p));
            }
        }
    }

    let mut merged_points = vec![LocalPoint::new(0.0, 0.0); seeds.len()];
    let mut sums = vec![0.0_f64; seeds.len()];
    let mut counts = vec![0usize; seeds.len()];
    let mut first_seen = vec![usize::MAX; seeds.len()];
    for i in 0..points.len() {
        let c = cluster_of[i];
        sums[c] += values[i];
        counts[c] += 1;
        if i < first_seen[c] {
            first_seen[c] = i;
        }
    }
    for (c, &(seed_idx, _)) in seeds.iter().enumerate() {
        merged_points[c] = points[seed_idx];
    }

    // emit clusters in first-appearance order so results do not depend on the
    // sort above
    let mut emit: Vec<usize> = (0..seeds.len()).collect();
    emit.sort_by_key(|&c| first_seen[c]);
    let points_out: Vec<LocalPoint> = emit.iter().map(|&c| merged_points[c]).collect();
    let values_out: Vec<f64> = emit.iter().map(|&c| sums[c] / counts[c] as f64).collect();
    (points_out, values_out)
}
