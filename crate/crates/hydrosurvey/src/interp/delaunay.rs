//! Delaunay triangulation of scattered survey points.
//!
//! Incremental Bowyer-Watson insertion into an enclosing super-triangle,
//! with the robust predicates deciding every orientation and circumcircle
//! question. A Lawson flip pass runs after the super-triangle is stripped;
//! with exact predicates it terminates and leaves every interior edge
//! locally Delaunay, which guards the hull edges against artifacts of the
//! finite super-triangle.

use std::collections::{BTreeMap, BTreeSet};

use crate::geo::LocalPoint;
use crate::interp::predicates::{incircle, orient2d};
use crate::interp::InterpError;

/// A triangulation over a fixed vertex set. Triangles are index triples in
/// counter-clockwise order.
#[derive(Debug, Clone)]
pub struct Triangulation {
    pub vertices: Vec<LocalPoint>,
    pub triangles: Vec<[usize; 3]>,
}

fn pt(p: LocalPoint) -> [f64; 2] {
    [p.x, p.y]
}

/// Builds the Delaunay triangulation of `points`.
///
/// Fails when fewer than three points are given, when all points are
/// collinear, or when two points coincide exactly (callers deduplicate
/// via [`crate::interp::ScatterSet`]).
pub fn triangulate(points: &[LocalPoint]) -> Result<Triangulation, InterpError> {
    if points.len() < 3 {
        return Err(InterpError::Degenerate(format!(
            "need at least 3 points, got {}",
            points.len()
        )));
    }
    for p in points {
        // the bound keeps the super-triangle and the lifted in-circle terms
        // comfortably inside f64 range
        if !p.x.is_finite() || !p.y.is_finite() || p.x.abs() > 1e12 || p.y.abs() > 1e12 {
            return Err(InterpError::Degenerate(format!(
                "point ({}, {}) is not a usable local coordinate",
                p.x, p.y
            )));
        }
    }
    if !has_noncollinear_triple(points) {
        return Err(InterpError::Degenerate("all points are collinear".into()));
    }

    let n = points.len();
    let (min_x, max_x) = min_max(points.iter().map(|p| p.x));
    let (min_y, max_y) = min_max(points.iter().map(|p| p.y));
    let span = (max_x - min_x).max(max_y - min_y).max(1.0);
    let cx = (min_x + max_x) / 2.0;
    let cy = (min_y + max_y) / 2.0;
    // Far enough out that data circumcircles essentially never reach a super
    // vertex; the flip pass repairs the rare case where one does.
    let m = 1e6 * span;
    let mut vertices = points.to_vec();
    vertices.push(LocalPoint::new(cx - 20.0 * m, cy - m));
    vertices.push(LocalPoint::new(cx + 20.0 * m, cy - m));
    vertices.push(LocalPoint::new(cx, cy + 20.0 * m));

    let mut triangles: Vec<[usize; 3]> = Vec::with_capacity(2 * n + 4);
    let super_tri = ccw_triple([n, n + 1, n + 2], &vertices);
    triangles.push(super_tri);

    let mut bad: Vec<usize> = Vec::new();
    let mut cavity_edges: Vec<(usize, usize)> = Vec::new();
    for (pi, p) in points.iter().enumerate() {
        bad.clear();
        for (ti, tri) in triangles.iter().enumerate() {
            let (a, b, c) = (vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
            if incircle(pt(a), pt(b), pt(c), pt(*p)) > 0.0 {
                bad.push(ti);
            }
        }
        if bad.is_empty() {
            // only happens when p coincides with an existing vertex
            return Err(InterpError::DuplicatePoint { x: p.x, y: p.y });
        }

        // Directed edges appearing without their twin bound the cavity.
        cavity_edges.clear();
        for &ti in &bad {
            let t = triangles[ti];
            for k in 0..3 {
                cavity_edges.push((t[k], t[(k + 1) % 3]));
            }
        }
        let edge_set: BTreeSet<(usize, usize)> = cavity_edges.iter().copied().collect();

        // Remove the cavity (descending order keeps indices valid), then fan.
        for &ti in bad.iter().rev() {
            triangles.swap_remove(ti);
        }
        for &(ea, eb) in &cavity_edges {
            if edge_set.contains(&(eb, ea)) {
                continue; // interior to the cavity
            }
            if orient2d(pt(vertices[ea]), pt(vertices[eb]), pt(*p)) <= 0.0 {
                return Err(InterpError::Degenerate(format!(
                    "cavity fan degenerated at point ({}, {})",
                    p.x, p.y
                )));
            }
            triangles.push([ea, eb, pi]);
        }
    }

    triangles.retain(|t| t.iter().all(|&v| v < n));
    if triangles.is_empty() {
        return Err(InterpError::Degenerate("triangulation collapsed".into()));
    }
    vertices.truncate(n);

    let mut tri = Triangulation {
        vertices,
        triangles,
    };
    lawson_flip(&mut tri)?;
    Ok(tri)
}

/// Restores the local Delaunay property by edge flipping. With exact
/// predicates this terminates; the cap is a hard failsafe.
fn lawson_flip(tri: &mut Triangulation) -> Result<(), InterpError> {
    let cap = 64 * tri.triangles.len().max(16);
    let mut flips = 0usize;
    loop {
        let mut flipped = false;
        // undirected edge -> (triangle index, opposite vertex)
        let mut edges: BTreeMap<(usize, usize), Vec<(usize, usize)>> = BTreeMap::new();
        for (ti, t) in tri.triangles.iter().enumerate() {
            for k in 0..3 {
                let (u, v, w) = (t[k], t[(k + 1) % 3], t[(k + 2) % 3]);
                let key = (u.min(v), u.max(v));
                edges.entry(key).or_default().push((ti, w));
            }
        }
        for pair in edges.values() {
            if pair.len() != 2 {
                continue;
            }
            let (t1, opp1) = pair[0];
            let (t2, opp2) = pair[1];
            let tri1 = tri.triangles[t1];
            // shared edge as directed in t1: (a, b) with opp1 across it
            let k = (0..3)
                .find(|&k| tri1[k] != opp1 && tri1[(k + 1) % 3] != opp1)
                .unwrap();
            let (a, b, c, d) = (tri1[k], tri1[(k + 1) % 3], opp1, opp2);
            let (pa, pb, pc, pd) = (
                tri.vertices[a],
                tri.vertices[b],
                tri.vertices[c],
                tri.vertices[d],
            );
            if incircle(pt(pa), pt(pb), pt(pc), pt(pd)) > 0.0 {
                // flip (a,b,c)+(b,a,d) into (a,d,c)+(d,b,c)
                tri.triangles[t1] = [a, d, c];
                tri.triangles[t2] = [d, b, c];
                flipped = true;
                flips += 1;
                if flips > cap {
                    return Err(InterpError::Degenerate(
                        "edge flipping failed to converge".into(),
                    ));
                }
                break; // adjacency is stale after a flip; rebuild
            }
        }
        if !flipped {
            return Ok(());
        }
    }
}

fn has_noncollinear_triple(points: &[LocalPoint]) -> bool {
    let a = points[0];
    let Some(b) = points.iter().find(|p| (p.x, p.y) != (a.x, a.y)) else {
        return false;
    };
    points
        .iter()
        .any(|c| orient2d(pt(a), pt(*b), pt(*c)) != 0.0)
}

fn ccw_triple(idx: [usize; 3], vertices: &[LocalPoint]) -> [usize; 3] {
    if orient2d(
        pt(vertices[idx[0]]),
        pt(vertices[idx[1]]),
        pt(vertices[idx[2]]),
    ) > 0.0
    {
        idx
    } else {
        [idx[0], idx[2], idx[1]]
    }
}

fn min_max(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    })
}

impl Triangulation {
    /// Signed area of triangle `ti` (positive by construction).
    pub fn triangle_area(&self, ti: usize) -> f64 {
        let [a, b, c] = self.triangles[ti];
        let (pa, pb, pc) = (self.vertices[a], self.vertices[b], self.vertices[c]);
        ((pb.x - pa.x) * (pc.y - pa.y) - (pb.y - pa.y) * (pc.x - pa.x)) / 2.0
    }

    /// Index of the lowest-indexed triangle containing `p` (boundary
    /// inclusive), or `None` outside the hull.
    pub fn locate(&self, p: LocalPoint) -> Option<usize> {
        (0..self.triangles.len()).find(|&ti| self.contains(ti, p))
    }

    pub(crate) fn contains(&self, ti: usize, p: LocalPoint) -> bool {
        let [a, b, c] = self.triangles[ti];
        let (pa, pb, pc) = (
            pt(self.vertices[a]),
            pt(self.vertices[b]),
            pt(self.vertices[c]),
        );
        orient2d(pa, pb, pt(p)) >= 0.0
            && orient2d(pb, pc, pt(p)) >= 0.0
            && orient2d(pc, pa, pt(p)) >= 0.0
    }

    /// Barycentric interpolation of `values` (parallel to `vertices`) at `p`.
    /// Returns `None` outside the convex hull.
    pub fn interp_at(&self, values: &[f64], p: LocalPoint) -> Option<f64> {
        assert_eq!(
            values.len(),
            self.vertices.len(),
            "values must parallel vertices"
        );
        let ti = self.locate(p)?;
        Some(self.interp_in(ti, values, p))
    }

    pub(crate) fn interp_in(&self, ti: usize, values: &[f64], p: LocalPoint) -> f64 {
        let [ia, ib, ic] = self.triangles[ti];
        let (a, b, c) = (self.vertices[ia], self.vertices[ib], self.vertices[ic]);
        let det = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
        let wa = ((b.x - p.x) * (c.y - p.y) - (b.y - p.y) * (c.x - p.x)) / det;
        let wb = ((c.x - p.x) * (a.y - p.y) - (c.y - p.y) * (a.x - p.x)) / det;
        let wc = ((a.x - p.x) * (b.y - p.y) - (a.y - p.y) * (b.x - p.x)) / det;
        // containment says inside; clip float dust so the result stays within
        // the vertex value bounds
        let (wa, wb, wc) = (wa.max(0.0), wb.max(0.0), wc.max(0.0));
        let sum = wa + wb + wc;
        (wa * values[ia] + wb * values[ib] + wc * values[ic]) / sum
    }
}
