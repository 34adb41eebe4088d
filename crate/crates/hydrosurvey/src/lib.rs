//! River-survey toolkit for small autonomous surface vehicles.
//!
//! The crate covers the full desk-scale pipeline of a boat-based river survey:
//!
//! - [`geo`] — WGS84 coordinates, a rotated local tangent-plane frame in
//!   meters, and a haversine distance oracle.
//! - [`mission`] — boustrophedon (lawnmower) coverage plans and cross-river
//!   transect plans as ordered waypoint lists.
//! - [`sim`] — a differential-drive vehicle simulator that follows a plan
//!   through a current field while noisy sensors sample synthetic scalar
//!   fields, emitting CSV logs in the ingest schema.
//! - [`ingest`] — CSV log parsing, multi-rate stream synchronization, and
//!   tidal-condition tagging.
//! - [`interp`] — Delaunay triangulation, barycentric interpolation onto
//!   regular rasters (ESRI ASCII export), and sliding-window riverbed
//!   cross-sections.
//! - [`stats`] — per-run parameter summaries and Pearson correlation tables,
//!   pooled and grouped by tide.
//! - [`config`] — the JSON run configuration binding all of the above, used
//!   by the `hydrosurvey` command-line tool.
//!
//! The raster fill and the correlation tables run data-parallel on rayon when
//! the default `parallel` feature is enabled; build with
//! `--no-default-features` for a fully sequential library.

pub mod config;
pub mod geo;
pub mod ingest;
pub mod interp;
pub mod mission;
pub mod sim;
pub mod stats;

pub use geo::{
    geodesic_distance, make_local_frame, GeoPoint, LocalFrame, LocalPoint, SurveyRegion,
};
pub use mission::{plan_lawnmower, plan_transect, MissionPlan, Rect, Waypoint};
