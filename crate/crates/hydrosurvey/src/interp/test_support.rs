//! Shared geometry oracles for the interpolation tests.

use crate::geo::LocalPoint;

/// Andrew's monotone chain: CCW convex hull without the closing point.
pub fn monotone_chain(points: &[LocalPoint]) -> Vec<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> = points.iter().map(|p| (p.x, p.y)).collect();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(pts.len() + 1);
    for &pnt in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], pnt) <= 0.0 {
            hull.pop();
        }
        hull.push(pnt);
    }
    // the upper chain must not pop into the lower one
    let lower_len = hull.len() + 1;
    for &pnt in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len
            && cross(hull[hull.len() - 2], hull[hull.len() - 1], pnt) <= 0.0
        {
            hull.pop();
        }
        hull.push(pnt);
    }
    hull.pop();
    hull
}

/// Area enclosed by the convex hull of `points`.
pub fn hull_area(points: &[LocalPoint]) -> f64 {
    let hull = monotone_chain(points);
    let mut twice = 0.0;
    for i in 0..hull.len() {
        let j = (i + 1) % hull.len();
        twice += hull[i].0 * hull[j].1 - hull[j].0 * hull[i].1;
    }
    twice / 2.0
}
