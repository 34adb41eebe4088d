//! Riverbed cross-sections from transect passes.

use crate::geo::LocalPoint;
use crate::interp::InterpError;

/// A 1D depth profile along a transect chord.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossSectionProfile {
    /// Station distances along the chord, strictly increasing, in meters.
    pub stations: Vec<f64>,
    /// Mean depth at each station, in meters.
    pub depths: Vec<f64>,
    /// Averaging window length used, in meters.
    pub window: f64,
}

/// Documented default sliding-window length for paper-scale transects.
pub const DEFAULT_WINDOW_M: f64 = 2.0;

/// Pools every `(chord distance, depth)` pair from all passes and averages
/// them in a sliding window centered on each station.
///
/// Stations sit at multiples of `station_step` spanning the pooled distance
/// range; a sample contributes to a station when it lies within `window / 2`
/// of it (inclusive). Windows truncate at the chord ends, and stations whose
/// window catches no samples are omitted.
pub fn cross_section(
    tracks: &[Vec<(f64, f64)>],
    station_step: f64,
    window: f64,
) -> Result<CrossSectionProfile, InterpError> {
    if !(station_step > 0.0) || !station_step.is_finite() || !window.is_finite() {
        return Err(InterpError::InvalidParameter(format!(
            "station step {station_step}"
        )));
    }
    if window < station_step {
        return Err(InterpError::InvalidParameter(format!(
            "window {window} m must be at least the station step {station_step} m"
        )));
    }
    let mut pooled: Vec<(f64, f64)> = tracks.iter().flatten().copied().collect();
    if pooled.is_empty() {
        return Err(InterpError::EmptyInput("no transect samples".into()));
    }
    // sorting makes the windowed means independent of track and sample order
    pooled.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let dmin = pooled.first().unwrap().0;
    let dmax = pooled.last().unwrap().0;
    let tol = 1e-9 * dmax.abs().max(1.0);
    let kmin = ((dmin - tol) / station_step).ceil() as i64;
    let kmax = ((dmax + tol) / station_step).floor() as i64;

    let half = window / 2.0;
    let mut stations = Vec::new();
    let mut depths = Vec::new();
    for k in kmin..=kmax {
        let s = k as f64 * station_step;
        let lo = pooled.partition_point(|&(d, _)| d < s - half);
        let hi = pooled.partition_point(|&(d, _)| d <= s + half);
        if lo == hi {
            continue;
        }
        let sum: f64 = pooled[lo..hi].iter().map(|&(_, z)| z).sum();
        stations.push(s);
        depths.push(sum / (hi - lo) as f64);
    }
    if stations.is_empty() {
        return Err(InterpError::EmptyInput(
            "no station window caught a sample".into(),
        ));
    }
    Ok(CrossSectionProfile {
        stations,
        depths,
        window,
    })
}

/// A track position mapped onto a transect chord.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChordProjection {
    /// Scalar projection onto the chord direction, meters from `a`.
    pub along: f64,
    /// Signed lateral offset from the chord (positive to the left of a->b),
    /// kept for track-quality checks.
    pub lateral: f64,
}

/// Projects positions onto the chord `a -> b`.
pub fn chord_project(
    a: LocalPoint,
    b: LocalPoint,
    positions: &[LocalPoint],
) -> Result<Vec<ChordProjection>, InterpError> {
    let len = a.distance(b);
    if len == 0.0 {
        return Err(InterpError::Degenerate("chord endpoints coincide".into()));
    }
    let ux = (b.x - a.x) / len;
    let uy = (b.y - a.y) / len;
    Ok(positions
        .iter()
        .map(|p| ChordProjection {
            along: (p.x - a.x) * ux + (p.y - a.y) * uy,
            lateral: ux * (p.y - a.y) - uy * (p.x - a.x),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_when_track_on_stations() {
        let track: Vec<(f64, f64)> = (0..=20).map(|i| (i as f64, 5.0 - 0.1 * i as f64)).collect();
        let profile = cross_section(std::slice::from_ref(&track), 1.0, 1.0).unwrap();
        assert_eq!(profile.stations.len(), track.len());
        for (i, (&s, &z)) in profile.stations.iter().zip(&profile.depths).enumerate() {
            assert_eq!(s, track[i].0);
            assert_eq!(z, track[i].1);
        }
    }

    #[test]
    fn duplicate_tracks_average_to_either() {
        let track: Vec<(f64, f64)> = (0..=30)
            .map(|i| (0.5 * i as f64, 3.0 + 0.02 * i as f64))
            .collect();
        let one = cross_section(std::slice::from_ref(&track), 0.5, 1.0).unwrap();
        let two = cross_section(&[track.clone(), track.clone()], 0.5, 1.0).unwrap();
        assert_eq!(one.stations, two.stations);
        for (a, b) in one.depths.iter().zip(&two.depths) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn symmetric_perturbations_cancel() {
        // depth(d) = 5 - 0.04 d sampled twice with +/-0.1 pairs
        let line = |d: f64| 5.0 - 0.04 * d;
        let up: Vec<(f64, f64)> = (0..=80).map(|i| (i as f64, line(i as f64) + 0.1)).collect();
        let down: Vec<(f64, f64)> = (0..=80).map(|i| (i as f64, line(i as f64) - 0.1)).collect();
        let profile = cross_section(&[up, down], 1.0, 2.0).unwrap();
        for (&s, &z) in profile.stations.iter().zip(&profile.depths) {
            if (1.0..=79.0).contains(&s) {
                assert!(
                    (z - line(s)).abs() < 1e-9,
                    "station {s}: {z} vs {}",
                    line(s)
                );
            }
        }
    }

    #[test]
    fn order_of_tracks_and_samples_is_irrelevant() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let mut t1: Vec<(f64, f64)> = (0..200)
            .map(|_| (rng.random_range(0.0..40.0), rng.random_range(0.5..6.0)))
            .collect();
        let t2: Vec<(f64, f64)> = (0..150)
            .map(|_| (rng.random_range(0.0..40.0), rng.random_range(0.5..6.0)))
            .collect();
        let a = cross_section(&[t1.clone(), t2.clone()], 1.0, 2.0).unwrap();
        t1.reverse();
        let b = cross_section(&[t2, t1], 1.0, 2.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(cross_section(&[], 1.0, 2.0).is_err());
        assert!(cross_section(&[vec![]], 1.0, 2.0).is_err());
        assert!(cross_section(&[vec![(0.0, 1.0)]], 1.0, 0.5).is_err());
        assert!(cross_section(&[vec![(0.0, 1.0)]], 0.0, 2.0).is_err());
    }

    #[test]
    fn chord_projection_basics() {
        let a = LocalPoint::new(0.0, 0.0);
        let b = LocalPoint::new(30.0, 40.0);
        let got = chord_project(a, b, &[a, b]).unwrap();
        assert_eq!(got[0].along, 0.0);
        assert!((got[1].along - 50.0).abs() < 1e-12);

        // lateral offset drops out of the along-chord distance
        let mid_off = LocalPoint::new(15.0 - 4.0 * 0.8, 20.0 + 4.0 * 0.6);
        let proj = chord_project(a, b, &[mid_off]).unwrap()[0];
        assert!((proj.along - 25.0).abs() < 1e-12);
        assert!((proj.lateral - 4.0).abs() < 1e-12);

        assert!(chord_project(a, a, &[b]).is_err());
    }

    #[test]
    fn chord_matches_dot_product_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = LocalPoint::new(3.0, -2.0);
        let b = LocalPoint::new(-14.0, 27.0);
        let pts: Vec<LocalPoint> = (0..100)
            .map(|_| LocalPoint::new(rng.random_range(-30.0..30.0), rng.random_range(-30.0..30.0)))
            .collect();
        let got = chord_project(a, b, &pts).unwrap();
        let len = a.distance(b);
        for (p, g) in pts.iter().zip(&got) {
            let dot = ((p.x - a.x) * (b.x - a.x) + (p.y - a.y) * (b.y - a.y)) / len;
            assert!((g.along - dot).abs() < 1e-12);
        }
    }
}
