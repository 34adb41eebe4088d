//! Geographic coordinates and the local survey frame.
//!
//! Survey regions are small (order 100 m), so positions are worked in a local
//! tangent-plane frame: an equirectangular offset from a frame origin, scaled
//! to meters, then rotated so the frame axes line up with the river reach.
//! [`geodesic_distance`] (haversine on a spherical Earth) is kept alongside as
//! an independent check on the projection.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Mean Earth radius in meters, used by the haversine distance.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// Meters per degree of latitude on the sphere of radius [`EARTH_RADIUS_M`].
///
/// Derived as `2πR/360` so that projected offsets and haversine distances
/// agree to well under 0.1% at survey scale.
pub const METERS_PER_DEG_LAT: f64 = EARTH_RADIUS_M * std::f64::consts::PI / 180.0;

#[derive(Debug, Error, PartialEq)]
pub enum GeoError {
    #[error("latitude {0} outside [-90, 90]")]
    LatitudeOutOfRange(f64),
    #[error("longitude {0} outside [-180, 180]")]
    LongitudeOutOfRange(f64),
    #[error("frame origin latitude {0} too close to a pole (|lat| must be < 89)")]
    OriginNearPole(f64),
    #[error("coordinate is not finite")]
    NotFinite,
    #[error("survey region is degenerate: {0}")]
    DegenerateRegion(String),
}

/// A WGS84 position in decimal degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub lat: f64,
    pub lon: f64,
}

impl GeoPoint {
    pub fn new(lat: f64, lon: f64) -> Result<Self, GeoError> {
        let p = GeoPoint { lat, lon };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), GeoError> {
        if !self.lat.is_finite() || !self.lon.is_finite() {
            return Err(GeoError::NotFinite);
        }
        if !(-90.0..=90.0).contains(&self.lat) {
            return Err(GeoError::LatitudeOutOfRange(self.lat));
        }
        if !(-180.0..=180.0).contains(&self.lon) {
            return Err(GeoError::LongitudeOutOfRange(self.lon));
        }
        Ok(())
    }
}

/// A position in the local frame, in meters along the frame's rotated axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalPoint {
    pub x: f64,
    pub y: f64,
}

impl LocalPoint {
    pub fn new(x: f64, y: f64) -> Self {
        LocalPoint { x, y }
    }

    pub fn distance(&self, other: LocalPoint) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// A local tangent-plane frame: equirectangular projection about `origin`,
/// followed by a rotation of the axes by `rotation` radians.
///
/// `rotation` is the bearing of the frame's +x axis, measured
/// counter-clockwise from geographic east. A point due east of the origin at
/// `rotation = 0` projects onto +x.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalFrame {
    pub origin: GeoPoint,
    pub rotation: f64,
    pub meters_per_deg_lat: f64,
    pub meters_per_deg_lon: f64,
}

/// Builds the local frame at `origin` with the given axis rotation.
///
/// Fails for origins within a degree of the poles, where the longitude scale
/// collapses.
pub fn make_local_frame(origin: GeoPoint, rotation: f64) -> Result<LocalFrame, GeoError> {
    origin.validate()?;
    if origin.lat.abs() >= 89.0 {
        return Err(GeoError::OriginNearPole(origin.lat));
    }
    if !rotation.is_finite() {
        return Err(GeoError::NotFinite);
    }
    let meters_per_deg_lat = METERS_PER_DEG_LAT;
    let meters_per_deg_lon = meters_per_deg_lat * origin.lat.to_radians().cos();
    Ok(LocalFrame {
        origin,
        rotation,
        meters_per_deg_lat,
        meters_per_deg_lon,
    })
}

impl LocalFrame {
    /// Projects a geographic point into the frame. The origin maps to (0, 0).
    pub fn project(&self, p: GeoPoint) -> LocalPoint {
        let de = (p.lon - self.origin.lon) * self.meters_per_deg_lon;
        let dn = (p.lat - self.origin.lat) * self.meters_per_deg_lat;
        let (s, c) = self.rotation.sin_cos();
        LocalPoint {
            x: c * de + s * dn,
            y: -s * de + c * dn,
        }
    }

    /// Inverse of [`LocalFrame::project`].
    pub fn unproject(&self, p: LocalPoint) -> GeoPoint {
        let (s, c) = self.rotation.sin_cos();
        let de = c * p.x - s * p.y;
        let dn = s * p.x + c * p.y;
        GeoPoint {
            lat: self.origin.lat + dn / self.meters_per_deg_lat,
            lon: self.origin.lon + de / self.meters_per_deg_lon,
        }
    }
}

/// Haversine distance in meters on a sphere of radius [`EARTH_RADIUS_M`].
///
/// Independent of the frame projection; used as the accuracy oracle for it.
pub fn geodesic_distance(a: GeoPoint, b: GeoPoint) -> f64 {
    let lat1 = a.lat.to_radians();
    let lat2 = b.lat.to_radians();
    let dlat = lat2 - lat1;
    let dlon = (b.lon - a.lon).to_radians();
    let h = (dlat / 2.0).sin().powi(2) + lat1.cos() * lat2.cos() * (dlon / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_M * h.sqrt().min(1.0).asin()
}

/// A quadrilateral survey region given by four corners in traversal order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurveyRegion {
    pub corners: [GeoPoint; 4],
}

impl SurveyRegion {
    /// Validates the corner coordinates and that the quadrilateral is simple
    /// with nonzero area (checked in an unrotated frame at the first corner).
    pub fn new(corners: [GeoPoint; 4]) -> Result<Self, GeoError> {
        for c in &corners {
            c.validate()?;
        }
        let region = SurveyRegion { corners };
        let frame = make_local_frame(corners[0], 0.0)?;
        let pts = region.project_corners(&frame);

        let area = polygon_area(&pts);
        if area.abs() < 1e-9 {
            return Err(GeoError::DegenerateRegion(format!(
                "corner area {area:.3e} m^2 is effectively zero"
            )));
        }
        // A quadrilateral is simple iff neither pair of opposite edges crosses.
        if segments_cross(pts[0], pts[1], pts[2], pts[3])
            || segments_cross(pts[1], pts[2], pts[3], pts[0])
        {
            return Err(GeoError::DegenerateRegion(
                "opposite edges intersect (self-crossing quadrilateral)".into(),
            ));
        }
        Ok(region)
    }

    pub fn project_corners(&self, frame: &LocalFrame) -> [LocalPoint; 4] {
        [
            frame.project(self.corners[0]),
            frame.project(self.corners[1]),
            frame.project(self.corners[2]),
            frame.project(self.corners[3]),
        ]
    }

    /// Bearing (radians CCW from east) of the region's longest edge, so a
    /// frame built with this rotation has its x axis running along it. The
    /// direction is chosen so the region extends toward positive x from the
    /// first corner.
    pub fn longest_edge_rotation(&self) -> Result<f64, GeoError> {
        let frame = make_local_frame(self.corners[0], 0.0)?;
        let pts = self.project_corners(&frame);
        let mut best = (0.0_f64, 0.0_f64);
        for i in 0..4 {
            let j = (i + 1) % 4;
            let len = pts[i].distance(pts[j]);
            if len > best.0 {
                best = (len, (pts[j].y - pts[i].y).atan2(pts[j].x - pts[i].x));
            }
        }
        let (_, mut rotation) = best;
        let centroid_x = {
            let (s, c) = rotation.sin_cos();
            pts.iter().map(|p| c * p.x + s * p.y).sum::<f64>() / 4.0
        };
        if centroid_x < 0.0 {
            rotation = if rotation > 0.0 {
                rotation - std::f64::consts::PI
            } else {
                rotation + std::f64::consts::PI
            };
        }
        Ok(rotation)
    }
}

/// Frame whose origin is the region's first corner and whose x axis runs
/// along the region's longest edge.
pub fn frame_aligned_to_region(region: &SurveyRegion) -> Result<LocalFrame, GeoError> {
    make_local_frame(region.corners[0], region.longest_edge_rotation()?)
}

fn polygon_area(pts: &[LocalPoint]) -> f64 {
    let n = pts.len();
    let mut twice = 0.0;
    for i in 0..n {
        let j = (i + 1) % n;
        twice += pts[i].x * pts[j].y - pts[j].x * pts[i].y;
    }
    twice / 2.0
}

fn segments_cross(a: LocalPoint, b: LocalPoint, c: LocalPoint, d: LocalPoint) -> bool {
    let cross = |o: LocalPoint, p: LocalPoint, q: LocalPoint| {
        (p.x - o.x) * (q.y - o.y) - (p.y - o.y) * (q.x - o.x)
    };
    let d1 = cross(a, b, c);
    let d2 = cross(a, b, d);
    let d3 = cross(c, d, a);
    let d4 = cross(c, d, b);
    (d1 * d2 < 0.0) && (d3 * d4 < 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// The four survey corners used throughout the test suite (a reach of the
    /// lower Schuylkill River).
    pub fn survey_corners() -> [GeoPoint; 4] {
        [
            GeoPoint {
                lat: 39.94364,
                lon: -75.19973,
            },
            GeoPoint {
                lat: 39.94403,
                lon: -75.19943,
            },
            GeoPoint {
                lat: 39.94356,
                lon: -75.19856,
            },
            GeoPoint {
                lat: 39.9432,
                lon: -75.19883,
            },
        ]
    }

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "left={a} right={b} tol={tol}");
    }

    #[test]
    fn frame_scale_factors() {
        let f = make_local_frame(GeoPoint::new(39.94364, -75.19973).unwrap(), 0.0).unwrap();
        assert_close(
            f.meters_per_deg_lon,
            METERS_PER_DEG_LAT * (39.94364_f64).to_radians().cos(),
            1e-9,
        );

        let eq = make_local_frame(GeoPoint::new(0.0, 0.0).unwrap(), 0.0).unwrap();
        assert_eq!(eq.meters_per_deg_lon, eq.meters_per_deg_lat);

        let f60 = make_local_frame(GeoPoint::new(60.0, 0.0).unwrap(), 0.0).unwrap();
        let rel = (f60.meters_per_deg_lon - f60.meters_per_deg_lat / 2.0).abs()
            / (f60.meters_per_deg_lat / 2.0);
        assert!(rel < 1e-6);
    }

    #[test]
    fn frame_rejects_poles_and_bad_coords() {
        assert_eq!(
            make_local_frame(
                GeoPoint {
                    lat: 89.5,
                    lon: 0.0
                },
                0.0
            ),
            Err(GeoError::OriginNearPole(89.5))
        );
        assert!(GeoPoint::new(91.0, 0.0).is_err());
        assert!(GeoPoint::new(0.0, 200.0).is_err());
        assert!(GeoPoint::new(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn project_origin_is_zero() {
        let origin = GeoPoint::new(39.94364, -75.19973).unwrap();
        let f = make_local_frame(origin, 0.7).unwrap();
        let p = f.project(origin);
        assert_eq!((p.x, p.y), (0.0, 0.0));
    }

    #[test]
    fn project_one_millidegree_north() {
        let f = make_local_frame(GeoPoint::new(39.94364, -75.19973).unwrap(), 0.0).unwrap();
        let p = f.project(GeoPoint::new(39.94464, -75.19973).unwrap());
        // 0.001 deg of latitude at the frame's meters-per-degree scale.
        assert_close(p.x, 0.0, 1e-9);
        assert_close(p.y, 0.001 * METERS_PER_DEG_LAT, 0.01);
    }

    #[test]
    fn survey_long_edge_matches_haversine() {
        let corners = survey_corners();
        let f = make_local_frame(corners[0], 0.0).unwrap();
        let a = f.project(corners[0]);
        let d = f.project(corners[3]);
        let proj = a.distance(d);
        let hav = geodesic_distance(corners[0], corners[3]);
        assert_close(proj, 91.0, 1.5);
        assert!((proj - hav).abs() / hav < 1e-3, "proj={proj} hav={hav}");
    }

    #[test]
    fn unproject_round_trip() {
        let f = make_local_frame(GeoPoint::new(39.94364, -75.19973).unwrap(), 0.3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let p = GeoPoint {
                lat: 39.94364 + rng.random_range(-0.009..0.009),
                lon: -75.19973 + rng.random_range(-0.012..0.012),
            };
            let q = f.unproject(f.project(p));
            assert!((q.lat - p.lat).abs() < 1e-9, "lat {} vs {}", q.lat, p.lat);
            assert!((q.lon - p.lon).abs() < 1e-9, "lon {} vs {}", q.lon, p.lon);
        }
        let back = f.unproject(LocalPoint::new(0.0, 0.0));
        assert_close(back.lat, f.origin.lat, 1e-12);
        assert_close(back.lon, f.origin.lon, 1e-12);
    }

    #[test]
    fn unproject_one_hundred_eleven_meters() {
        let f = make_local_frame(GeoPoint::new(39.94364, -75.19973).unwrap(), 0.0).unwrap();
        let g = f.unproject(LocalPoint::new(0.0, 0.001 * METERS_PER_DEG_LAT));
        assert_close(g.lat, 39.94464, 1e-7);
        assert_close(g.lon, -75.19973, 1e-7);
    }

    #[test]
    fn haversine_basics() {
        let a = GeoPoint::new(12.5, 33.25).unwrap();
        assert_eq!(geodesic_distance(a, a), 0.0);
        let d = geodesic_distance(
            GeoPoint::new(0.0, 0.0).unwrap(),
            GeoPoint::new(0.0, 1.0).unwrap(),
        );
        assert_close(d, 111_195.0, 1.0);
    }

    #[test]
    fn projection_agrees_with_haversine_oracle() {
        // Pairs within 500 m of the origin at mid latitude: the projected
        // distance and the haversine must agree to 0.1%.
        let origin = GeoPoint::new(39.94364, -75.19973).unwrap();
        let f = make_local_frame(origin, 1.1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            let a = GeoPoint {
                lat: origin.lat + rng.random_range(-0.004..0.004),
                lon: origin.lon + rng.random_range(-0.005..0.005),
            };
            let b = GeoPoint {
                lat: origin.lat + rng.random_range(-0.004..0.004),
                lon: origin.lon + rng.random_range(-0.005..0.005),
            };
            let hav = geodesic_distance(a, b);
            if hav < 1.0 {
                continue;
            }
            let proj = f.project(a).distance(f.project(b));
            assert!(
                (proj - hav).abs() / hav < 1e-3,
                "proj={proj} hav={hav} a={a:?} b={b:?}"
            );
        }
    }

    #[test]
    fn rotation_is_an_isometry() {
        let origin = GeoPoint::new(39.94364, -75.19973).unwrap();
        let f0 = make_local_frame(origin, 0.0).unwrap();
        let f1 = make_local_frame(origin, -2.1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let a = GeoPoint {
                lat: origin.lat + rng.random_range(-0.003..0.003),
                lon: origin.lon + rng.random_range(-0.003..0.003),
            };
            let b = GeoPoint {
                lat: origin.lat + rng.random_range(-0.003..0.003),
                lon: origin.lon + rng.random_range(-0.003..0.003),
            };
            let d0 = f0.project(a).distance(f0.project(b));
            let d1 = f1.project(a).distance(f1.project(b));
            assert!((d0 - d1).abs() <= 1e-9 * d0.max(1.0), "d0={d0} d1={d1}");
        }
    }

    #[test]
    fn region_validation() {
        let region = SurveyRegion::new(survey_corners()).unwrap();
        // Longest edge is the downstream bank, roughly ESE at this reach.
        let rot = region.longest_edge_rotation().unwrap();
        assert!(rot.is_finite());
        let f = frame_aligned_to_region(&region).unwrap();
        let pts = region.project_corners(&f);
        // First corner pinned at the origin, long edge along +x.
        assert_eq!((pts[0].x, pts[0].y), (0.0, 0.0));

        // Bowtie ordering must be rejected.
        let c = survey_corners();
        let bowtie = [c[0], c[1], c[3], c[2]];
        assert!(matches!(
            SurveyRegion::new(bowtie),
            Err(GeoError::DegenerateRegion(_))
        ));

        // Repeated corners collapse to zero area.
        assert!(SurveyRegion::new([c[0], c[0], c[0], c[0]]).is_err());
    }

    proptest::proptest! {
        #[test]
        fn round_trip_any_frame(
            lat0 in -75.0_f64..75.0,
            lon0 in -179.0_f64..179.0,
            rotation in -std::f64::consts::PI..std::f64::consts::PI,
            dx in -2000.0_f64..2000.0,
            dy in -2000.0_f64..2000.0,
        ) {
            let f = make_local_frame(GeoPoint { lat: lat0, lon: lon0 }, rotation).unwrap();
            let p = LocalPoint::new(dx, dy);
            let q = f.project(f.unproject(p));
            proptest::prop_assert!((q.x - p.x).abs() < 1e-6);
            proptest::prop_assert!((q.y - p.y).abs() < 1e-6);

            let g = f.unproject(p);
            if g.validate().is_ok() {
                let back = f.unproject(f.project(g));
                proptest::prop_assert!((back.lat - g.lat).abs() < 1e-9);
                proptest::prop_assert!((back.lon - g.lon).abs() < 1e-9);
            }
        }
    }
}
