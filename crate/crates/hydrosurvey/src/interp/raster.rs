//! Regular-grid rasterization of scattered measurements.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::geo::LocalPoint;
use crate::interp::delaunay::{triangulate, Triangulation};
use crate::interp::{InterpError, ScatterSet};
use crate::mission::Rect;

/// NODATA marker written for masked cells in ESRI ASCII exports.
pub const NODATA: f64 = -9999.0;

/// A masked regular grid of interpolated values.
///
/// `origin` is the lower-left (south-west) corner; cells are stored row-major
/// from the south row up, `None` marking cells whose center falls outside the
/// scatter's convex hull.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterGrid {
    pub origin: LocalPoint,
    pub cell: f64,
    pub nx: usize,
    pub ny: usize,
    cells: Vec<Option<f64>>,
}

impl RasterGrid {
    /// Value at column `ix` (west to east), row `iy` (south to north).
    pub fn value(&self, ix: usize, iy: usize) -> Option<f64> {
        self.cells[iy * self.nx + ix]
    }

    /// Center of cell (`ix`, `iy`).
    pub fn center(&self, ix: usize, iy: usize) -> LocalPoint {
        LocalPoint::new(
            self.origin.x + (ix as f64 + 0.5) * self.cell,
            self.origin.y + (iy as f64 + 0.5) * self.cell,
        )
    }

    pub fn cells(&self) -> &[Option<f64>] {
        &self.cells
    }

    pub fn unmasked_count(&self) -> usize {
        self.cells.iter().filter(|c| c.is_some()).count()
    }

    /// Serializes as an ESRI ASCII grid: six header lines in fixed order,
    /// then rows north to south.
    pub fn to_esri_ascii(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("ncols {}\n", self.nx));
        out.push_str(&format!("nrows {}\n", self.ny));
        out.push_str(&format!("xllcorner {}\n", self.origin.x));
        out.push_str(&format!("yllcorner {}\n", self.origin.y));
        out.push_str(&format!("cellsize {}\n", self.cell));
        out.push_str(&format!("NODATA_value {}\n", NODATA));
        for iy in (0..self.ny).rev() {
            let row: Vec<String> = (0..self.nx)
                .map(|ix| match self.value(ix, iy) {
                    Some(v) => format!("{v}"),
                    None => format!("{NODATA}"),
                })
                .collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }
}

/// Bins triangles by bounding box over the grid so cell lookups only test
/// nearby triangles. Candidates stay sorted by triangle index, preserving the
/// lowest-index tie-break of a full scan.
struct TriangleBins {
    min_x: f64,
    min_y: f64,
    inv: f64,
    nx: usize,
    ny: usize,
    bins: Vec<Vec<u32>>,
}

impl TriangleBins {
    fn build(tri: &Triangulation, bin_size: f64) -> Self {
        let (mut min_x, mut min_y) = (f64::INFINITY, f64::INFINITY);
        let (mut max_x, mut max_y) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for v in &tri.vertices {
            min_x = min_x.min(v.x);
            min_y = min_y.min(v.y);
            max_x = max_x.max(v.x);
            max_y = max_y.max(v.y);
        }
        // keep the index bounded no matter how fine the cell is
        let span = (max_x - min_x).max(max_y - min_y);
        let bin_size = bin_size.max(span / 2048.0);
        let inv = 1.0 / bin_size;
        let nx = (((max_x - min_x) * inv).ceil() as usize).max(1);
        let ny = (((max_y - min_y) * inv).ceil() as usize).max(1);
        let mut bins = vec![Vec::new(); nx * ny];
        for (ti, t) in tri.triangles.iter().enumerate() {
            let xs = t.map(|i| tri.vertices[i].x);
            let ys = t.map(|i| tri.vertices[i].y);
            let bx0 = clamp_bin(
                (xs.iter().copied().fold(f64::INFINITY, f64::min) - min_x) * inv,
                nx,
            );
            let bx1 = clamp_bin(
                (xs.iter().copied().fold(f64::NEG_INFINITY, f64::max) - min_x) * inv,
                nx,
            );
            let by0 = clamp_bin(
                (ys.iter().copied().fold(f64::INFINITY, f64::min) - min_y) * inv,
                ny,
            );
            let by1 = clamp_bin(
                (ys.iter().copied().fold(f64::NEG_INFINITY, f64::max) - min_y) * inv,
                ny,
            );
            for by in by0..=by1 {
                for bx in bx0..=bx1 {
                    bins[by * nx + bx].push(ti as u32);
                }
            }
        }
        TriangleBins {
            min_x,
            min_y,
            inv,
            nx,
            ny,
            bins,
        }
    }

    fn locate(&self, tri: &Triangulation, p: LocalPoint) -> Option<usize> {
        let bx = (p.x - self.min_x) * self.inv;
        let by = (p.y - self.min_y) * self.inv;
        // anything outside the vertex bounding box is outside the hull
        if bx < 0.0 || by < 0.0 || bx > self.nx as f64 || by > self.ny as f64 {
            return None;
        }
        self.bins[clamp_bin(by, self.ny) * self.nx + clamp_bin(bx, self.nx)]
            .iter()
            .map(|&ti| ti as usize)
            .find(|&ti| tri.contains(ti, p))
    }
}

fn clamp_bin(v: f64, n: usize) -> usize {
    if v < 0.0 {
        0
    } else {
        (v as usize).min(n - 1)
    }
}

fn grid_geometry(
    scatter: &ScatterSet,
    cell: f64,
    bounds: Option<Rect>,
) -> Result<(LocalPoint, usize, usize), InterpError> {
    let (x0, y0, w, h) = match bounds {
        Some(r) => (r.x0, r.y0, r.width, r.height),
        None => {
            let (mut min_x, mut min_y) = (f64::INFINITY, f64::INFINITY);
            let (mut max_x, mut max_y) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
            for p in scatter.points() {
                min_x = min_x.min(p.x);
                min_y = min_y.min(p.y);
                max_x = max_x.max(p.x);
                max_y = max_y.max(p.y);
            }
            (min_x, min_y, max_x - min_x, max_y - min_y)
        }
    };
    let nx = ((w / cell).ceil() as usize).max(1);
    let ny = ((h / cell).ceil() as usize).max(1);
    if nx.saturating_mul(ny) > MAX_GRID_CELLS {
        return Err(InterpError::InvalidParameter(format!(
            "grid of {nx} x {ny} cells exceeds the {MAX_GRID_CELLS}-cell limit; use a coarser cell size"
        )));
    }
    Ok((LocalPoint::new(x0, y0), nx, ny))
}

/// Upper bound on grid cells, guarding against runaway cell sizes.
const MAX_GRID_CELLS: usize = 64_000_000;

fn prepared(scatter: &ScatterSet, cell: f64) -> Result<(Triangulation, TriangleBins), InterpError> {
    if !(cell > 0.0) || !cell.is_finite() {
        return Err(InterpError::InvalidParameter(format!("cell size {cell}")));
    }
    let tri = triangulate(scatter.points())?;
    let bins = TriangleBins::build(&tri, cell.max(1.0));
    Ok((tri, bins))
}

fn fill_row(
    tri: &Triangulation,
    bins: &TriangleBins,
    values: &[f64],
    origin: LocalPoint,
    cell: f64,
    nx: usize,
    iy: usize,
) -> Vec<Option<f64>> {
    (0..nx)
        .map(|ix| {
            let center = LocalPoint::new(
                origin.x + (ix as f64 + 0.5) * cell,
                origin.y + (iy as f64 + 0.5) * cell,
            );
            bins.locate(tri, center)
                .map(|ti| tri.interp_in(ti, values, center))
        })
        .collect()
}

/// Interpolates the scatter onto a regular grid of `cell`-sized cells.
///
/// `bounds` defaults to the scatter bounding box. Cell centers outside the
/// convex hull are masked. Runs row-parallel when the `parallel` feature is
/// enabled; results are identical either way.
pub fn rasterize(
    scatter: &ScatterSet,
    cell: f64,
    bounds: Option<Rect>,
) -> Result<RasterGrid, InterpError> {
    #[cfg(feature = "parallel")]
    {
        let (tri, bins) = prepared(scatter, cell)?;
        let (origin, nx, ny) = grid_geometry(scatter, cell, bounds)?;
        let values = scatter.values();
        let cells: Vec<Option<f64>> = (0..ny)
            .into_par_iter()
            .flat_map_iter(|iy| fill_row(&tri, &bins, values, origin, cell, nx, iy))
            .collect();
        Ok(RasterGrid {
            origin,
            cell,
            nx,
            ny,
            cells,
        })
    }
    #[cfg(not(feature = "parallel"))]
    {
        rasterize_sequential(scatter, cell, bounds)
    }
}

/// Single-threaded [`rasterize`], kept callable for benchmarking against the
/// parallel path.
pub fn rasterize_sequential(
    scatter: &ScatterSet,
    cell: f64,
    bounds: Option<Rect>,
) -> Result<RasterGrid, InterpError> {
    let (tri, bins) = prepared(scatter, cell)?;
    let (origin, nx, ny) = grid_geometry(scatter, cell, bounds)?;
    let values = scatter.values();
    let mut cells = Vec::with_capacity(nx * ny);
    for iy in 0..ny {
        cells.extend(fill_row(&tri, &bins, values, origin, cell, nx, iy));
    }
    Ok(RasterGrid {
        origin,
        cell,
        nx,
        ny,
        cells,
    })
}
