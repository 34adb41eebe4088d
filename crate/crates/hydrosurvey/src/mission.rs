//! Coverage mission planning: boustrophedon (lawnmower) sweeps over a
//! rectangle and back-and-forth transects across the channel.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geo::LocalPoint;

/// Capture radius handed to plans when the caller has no better value.
/// Matched to consumer-GPS accuracy so the simulator neither stalls on
/// unreachable waypoints nor skates past lanes.
pub const DEFAULT_CAPTURE_RADIUS_M: f64 = 1.0;

/// Documented default lane spacing for a reach on the order of 90 m x 40 m
/// (about nine lanes across the short axis).
pub const DEFAULT_LANE_SPACING_M: f64 = 5.0;

#[derive(Debug, Error, PartialEq)]
pub enum MissionError {
    #[error("lane spacing {spacing} m exceeds cross-axis extent {cross_extent} m")]
    InvalidSpacing { spacing: f64, cross_extent: f64 },
    #[error("rectangle sides and spacing must be positive and finite")]
    InvalidRect,
    #[error("transect endpoints coincide")]
    DegenerateSegment,
    #[error("transect needs at least one pass")]
    InvalidPasses,
    #[error("capture radius must be positive")]
    InvalidCaptureRadius,
}

/// An axis-aligned rectangle in the local frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub width: f64,
    pub height: f64,
}

impl Rect {
    pub fn new(x0: f64, y0: f64, width: f64, height: f64) -> Self {
        Rect {
            x0,
            y0,
            width,
            height,
        }
    }
}

/// Which rectangle side the lanes run parallel to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LaneAxis {
    AlongWidth,
    AlongHeight,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Waypoint {
    pub position: LocalPoint,
    pub capture_radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanKind {
    Lawnmower,
    Transect,
}

/// An ordered waypoint list realizing one coverage pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct MissionPlan {
    pub kind: PlanKind,
    pub waypoints: Vec<Waypoint>,
    /// Lane spacing in meters; lawnmower plans only.
    pub lane_spacing: Option<f64>,
    /// Number of full traversals; transect plans only.
    pub passes: Option<u32>,
}

/// Lane offsets across the sweep axis: `0, s, 2s, ...` with the final lane
/// clamped onto the far edge so both boundaries are always surveyed.
fn lane_offsets(extent: f64, spacing: f64) -> Vec<f64> {
    let tol = 1e-9 * extent.max(1.0);
    let mut offsets = Vec::new();
    let mut k = 0u32;
    loop {
        let off = f64::from(k) * spacing;
        if off >= extent - tol {
            break;
        }
        offsets.push(off);
        k += 1;
    }
    offsets.push(extent);
    offsets
}

/// Plans a serpentine sweep of `rect` with lanes parallel to `lane_axis`,
/// spaced `spacing` meters apart across the other axis.
pub fn plan_lawnmower(
    rect: Rect,
    spacing: f64,
    lane_axis: LaneAxis,
    capture_radius: f64,
) -> Result<MissionPlan, MissionError> {
    if !(rect.width > 0.0 && rect.height > 0.0 && spacing > 0.0)
        || !rect.width.is_finite()
        || !rect.height.is_finite()
        || !spacing.is_finite()
        || !rect.x0.is_finite()
        || !rect.y0.is_finite()
    {
        return Err(MissionError::InvalidRect);
    }
    if capture_radius <= 0.0 {
        return Err(MissionError::InvalidCaptureRadius);
    }
    let cross_extent = match lane_axis {
        LaneAxis::AlongWidth => rect.height,
        LaneAxis::AlongHeight => rect.width,
    };
    if spacing > cross_extent {
        return Err(MissionError::InvalidSpacing {
            spacing,
            cross_extent,
        });
    }

    let mut waypoints = Vec::new();
    for (lane, off) in lane_offsets(cross_extent, spacing).iter().enumerate() {
        let (start, end) = match lane_axis {
            LaneAxis::AlongWidth => (
                LocalPoint::new(rect.x0, rect.y0 + off),
                LocalPoint::new(rect.x0 + rect.width, rect.y0 + off),
            ),
            LaneAxis::AlongHeight => (
                LocalPoint::new(rect.x0 + off, rect.y0),
                LocalPoint::new(rect.x0 + off, rect.y0 + rect.height),
            ),
        };
        let (a, b) = if lane % 2 == 0 {
            (start, end)
        } else {
            (end, start)
        };
        waypoints.push(Waypoint {
            position: a,
            capture_radius,
        });
        waypoints.push(Waypoint {
            position: b,
            capture_radius,
        });
    }
    Ok(MissionPlan {
        kind: PlanKind::Lawnmower,
        waypoints,
        lane_spacing: Some(spacing),
        passes: None,
    })
}

/// Plans `passes` full traversals of the segment `a`-`b`, alternating
/// direction, as used for cross-channel bathymetry transects.
pub fn plan_transect(
    a: LocalPoint,
    b: LocalPoint,
    passes: u32,
    capture_radius: f64,
) -> Result<MissionPlan, MissionError> {
    if a == b {
        return Err(MissionError::DegenerateSegment);
    }
    if passes == 0 {
        return Err(MissionError::InvalidPasses);
    }
    if capture_radius <= 0.0 {
        return Err(MissionError::InvalidCaptureRadius);
    }
    let waypoints = (0..=passes)
        .map(|i| Waypoint {
            position: if i % 2 == 0 { a } else { b },
            capture_radius,
        })
        .collect();
    Ok(MissionPlan {
        kind: PlanKind::Transect,
        waypoints,
        lane_spacing: None,
        passes: Some(passes),
    })
}

/// Total length of the plan: sum of consecutive waypoint distances.
pub fn path_length(plan: &MissionPlan) -> f64 {
    plan.waypoints
        .windows(2)
        .map(|w| w[0].position.distance(w[1].position))
        .sum()
}
