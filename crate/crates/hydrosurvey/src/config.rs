//! The JSON run configuration binding frames, regions, sensors, tides,
//! mission, interpolation, and simulation parameters, plus the on-disk
//! mission plan format.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geo::{make_local_frame, GeoError, GeoPoint, LocalFrame, LocalPoint, SurveyRegion};
use crate::ingest::{PositionSource, TideTable, AQUATROLL_ID, BATHY_ID, LISST_ID};
use crate::mission::{
    plan_lawnmower, plan_transect, LaneAxis, MissionError, MissionPlan, PlanKind, Rect, Waypoint,
};
use crate::sim::{Bump, CurrentField, ScalarFieldSpec, SimConfig};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Geo(#[from] GeoError),
    #[error(transparent)]
    Mission(#[from] MissionError),
    #[error("config: {0}")]
    Invalid(String),
}

/// Epoch seconds of the reference low-water peak (2022-08-09 12:50 US East).
pub const LOW_TIDE_EPOCH_S: f64 = 1_660_063_800.0;
/// Epoch seconds of the reference high-water peak (2022-08-03 11:46 US East).
pub const HIGH_TIDE_EPOCH_S: f64 = 1_659_541_560.0;

/// The example survey reach on the lower Schuylkill (four corners, traversal
/// order, `[lat, lon]`).
pub const EXAMPLE_CORNERS: [[f64; 2]; 4] = [
    [39.94364, -75.19973],
    [39.94403, -75.19943],
    [39.94356, -75.19856],
    [39.9432, -75.19883],
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct FrameConfig {
    /// `[lat, lon]`; defaults to the first region corner.
    pub origin: Option<[f64; 2]>,
    /// Frame x-axis bearing in radians CCW from east; defaults to aligning
    /// with the region's longest edge.
    pub rotation_rad: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct SensorsConfig {
    /// Reference stream for synchronization; defaults to the slowest sensor.
    pub reference: Option<String>,
    pub position_source: PositionSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TidesConfig {
    /// Tide table CSV, relative to the config file's directory.
    pub file: String,
    pub window_s: f64,
}

impl Default for TidesConfig {
    fn default() -> Self {
        TidesConfig {
            file: "tides.csv".into(),
            window_s: crate::ingest::DEFAULT_TIDE_WINDOW_S,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransectChord {
    pub a: [f64; 2],
    pub b: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MissionConfig {
    pub kind: PlanKind,
    pub spacing_m: f64,
    pub lane_axis: LaneAxis,
    pub passes: u32,
    pub capture_radius_m: f64,
    /// Transect endpoints in local-frame meters; defaults to the midline
    /// across the survey rectangle.
    pub transect: Option<TransectChord>,
}

impl Default for MissionConfig {
    fn default() -> Self {
        MissionConfig {
            kind: PlanKind::Lawnmower,
            spacing_m: crate::mission::DEFAULT_LANE_SPACING_M,
            lane_axis: LaneAxis::AlongWidth,
            passes: 2,
            capture_radius_m: crate::mission::DEFAULT_CAPTURE_RADIUS_M,
            transect: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InterpConfig {
    pub cell_m: f64,
    pub window_m: f64,
    pub station_step_m: f64,
}

impl Default for InterpConfig {
    fn default() -> Self {
        InterpConfig {
            cell_m: 1.0,
            window_m: crate::interp::DEFAULT_WINDOW_M,
            station_step_m: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StatsConfig {
    /// Parameter pairs for the correlation tables.
    pub pairs: Vec<[String; 2]>,
    pub group_by_tide: bool,
}

impl Default for StatsConfig {
    fn default() -> Self {
        StatsConfig {
            pairs: vec![
                ["temp_c".into(), "ph".into()],
                ["chl_rfu".into(), "nitrate_mg_l".into()],
                ["temp_c".into(), "nitrate_mg_l".into()],
            ],
            group_by_tide: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub frame: FrameConfig,
    /// Survey region corners in traversal order, `[lat, lon]` each.
    pub region: [[f64; 2]; 4],
    pub sensors: SensorsConfig,
    pub tides: TidesConfig,
    pub mission: MissionConfig,
    pub interp: InterpConfig,
    pub sim: SimConfig,
    pub current: CurrentField,
    /// Ground-truth field per parameter, for simulation.
    pub fields: BTreeMap<String, ScalarFieldSpec>,
    pub stats: StatsConfig,
    #[serde(skip)]
    base_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            frame: FrameConfig::default(),
            region: EXAMPLE_CORNERS,
            sensors: SensorsConfig::default(),
            tides: TidesConfig::default(),
            mission: MissionConfig::default(),
            interp: InterpConfig::default(),
            sim: SimConfig::default(),
            current: CurrentField::none(),
            fields: BTreeMap::new(),
            stats: StatsConfig::default(),
            base_dir: PathBuf::from("."),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg: RunConfig = serde_json::from_str(&text)?;
        cfg.base_dir = path
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_else(|| ".".into());
        Ok(cfg)
    }

    pub fn region(&self) -> Result<SurveyRegion, ConfigError> {
        let corners = self.region.map(|[lat, lon]| GeoPoint { lat, lon });
        Ok(SurveyRegion::new(corners)?)
    }

    /// The working frame: configured origin/rotation, with the region's first
    /// corner and longest-edge alignment as defaults.
    pub fn frame(&self) -> Result<LocalFrame, ConfigError> {
        let region = self.region()?;
        let origin = match self.frame.origin {
            Some([lat, lon]) => GeoPoint::new(lat, lon)?,
            None => region.corners[0],
        };
        let rotation = match self.frame.rotation_rad {
            Some(r) => r,
            None => region.longest_edge_rotation()?,
        };
        Ok(make_local_frame(origin, rotation)?)
    }

    /// Axis-aligned bounding rectangle of the region in the working frame.
    pub fn survey_rect(&self) -> Result<Rect, ConfigError> {
        let frame = self.frame()?;
        let pts = self.region()?.project_corners(&frame);
        let min_x = pts.iter().map(|p| p.x).fold(f64::INFINITY, f64::min);
        let max_x = pts.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max);
        let min_y = pts.iter().map(|p| p.y).fold(f64::INFINITY, f64::min);
        let max_y = pts.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max);
        Ok(Rect::new(min_x, min_y, max_x - min_x, max_y - min_y))
    }

    /// Transect endpoints: configured chord or the midline across the rect.
    pub fn transect_chord(&self) -> Result<(LocalPoint, LocalPoint), ConfigError> {
        if let Some(t) = self.mission.transect {
            return Ok((
                LocalPoint::new(t.a[0], t.a[1]),
                LocalPoint::new(t.b[0], t.b[1]),
            ));
        }
        let rect = self.survey_rect()?;
        let mid_x = rect.x0 + rect.width / 2.0;
        Ok((
            LocalPoint::new(mid_x, rect.y0),
            LocalPoint::new(mid_x, rect.y0 + rect.height),
        ))
    }

    /// Builds the mission plan this config describes.
    pub fn build_plan(&self) -> Result<MissionPlan, ConfigError> {
        match self.mission.kind {
            PlanKind::Lawnmower => Ok(plan_lawnmower(
                self.survey_rect()?,
                self.mission.spacing_m,
                self.mission.lane_axis,
                self.mission.capture_radius_m,
            )?),
            PlanKind::Transect => {
                let (a, b) = self.transect_chord()?;
                Ok(plan_transect(
                    a,
                    b,
                    self.mission.passes,
                    self.mission.capture_radius_m,
                )?)
            }
        }
    }

    /// Reference sensor for synchronization: configured, else the slowest.
    pub fn reference_id(&self) -> String {
        if let Some(r) = &self.sensors.reference {
            return r.clone();
        }
        let rates = [
            (AQUATROLL_ID, self.sim.rates.aquatroll_hz),
            (BATHY_ID, self.sim.rates.bathy_hz),
            (LISST_ID, self.sim.rates.lisst_hz),
        ];
        rates
            .iter()
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .map(|(id, _)| id.to_string())
            .unwrap()
    }

    /// Loads the tide table; a missing file is treated as an empty table
    /// (all records untagged).
    pub fn tide_table(&self) -> Result<TideTable, ConfigError> {
        let path = self.base_dir.join(&self.tides.file);
        if !path.exists() {
            return Ok(TideTable::default());
        }
        crate::ingest::parse_tides_file(&path)
            .map_err(|e| ConfigError::Invalid(format!("tide table {}: {e}", path.display())))
    }

    /// A fully populated example configuration for `init`: the example reach,
    /// its two tide events, and plausible synthetic fields.
    pub fn template() -> Self {
        let mut fields: BTreeMap<String, ScalarFieldSpec> = BTreeMap::new();
        fields.insert(
            "depth_m".into(),
            ScalarFieldSpec::GaussianBumps {
                base: 3.0,
                bumps: vec![Bump {
                    center: [45.0, 10.0],
                    amplitude: 2.0,
                    sigma: 18.0,
                }],
            },
        );
        fields.insert(
            "temp_c".into(),
            ScalarFieldSpec::Affine {
                x_slope: 3.0 / 90.0,
                y_slope: 0.0,
                offset: 28.3,
            },
        );
        // pH rises with temperature across the reach
        fields.insert(
            "ph".into(),
            ScalarFieldSpec::Affine {
                x_slope: 0.62 / 90.0,
                y_slope: 0.0,
                offset: 7.73,
            },
        );
        // nitrate falls where temperature rises
        fields.insert(
            "nitrate_mg_l".into(),
            ScalarFieldSpec::Affine {
                x_slope: -8.3 / 90.0,
                y_slope: 0.0,
                offset: 124.9,
            },
        );
        fields.insert(
            "pressure_psi".into(),
            ScalarFieldSpec::Constant { value: 14.7 },
        );
        fields.insert(
            "baro_mmhg".into(),
            ScalarFieldSpec::Constant { value: 8.05 },
        );
        fields.insert(
            "orp_mv".into(),
            ScalarFieldSpec::Affine {
                x_slope: 0.4,
                y_slope: 0.2,
                offset: 150.0,
            },
        );
        // chlorophyll rises toward the warm end, opposite to nitrate
        fields.insert(
            "chl_rfu".into(),
            ScalarFieldSpec::Affine {
                x_slope: 1.34 / 90.0,
                y_slope: 0.0,
                offset: 0.1,
            },
        );
        fields.insert(
            "sediment_mg_l".into(),
            ScalarFieldSpec::Constant { value: 35.0 },
        );

        let noise_sigma: BTreeMap<String, f64> = [
            ("ph", 0.01),
            ("temp_c", 0.02),
            ("nitrate_mg_l", 0.1),
            ("pressure_psi", 0.005),
            ("baro_mmhg", 0.01),
            ("orp_mv", 0.5),
            ("chl_rfu", 0.02),
            ("depth_m", 0.02),
            ("sediment_mg_l", 0.5),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();

        RunConfig {
            sim: SimConfig {
                rng_seed: 7,
                gps_noise_m: 0.5,
                noise_sigma,
                // half an hour before the low-water peak
                start_epoch_s: LOW_TIDE_EPOCH_S - 1800.0,
                ..SimConfig::default()
            },
            current: CurrentField::Uniform { v: [0.15, 0.05] },
            fields,
            ..RunConfig::default()
        }
    }

    /// The `tides.csv` matching the template's two events.
    pub fn template_tides_csv() -> String {
        format!(
            "peak_epoch_s,height_ft,kind\n{HIGH_TIDE_EPOCH_S},5.8,high\n{LOW_TIDE_EPOCH_S},0.5,low\n"
        )
    }

    pub fn to_json_pretty(&self) -> Result<String, ConfigError> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }
}

/// The on-disk mission plan: a JSON object with `kind`, `spacing`, `passes`,
/// shared `capture_radius`, and waypoints as `[x, y]` pairs in frame meters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanFile {
    pub kind: PlanKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spacing: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub passes: Option<u32>,
    pub capture_radius: f64,
    pub waypoints: Vec<[f64; 2]>,
}

impl PlanFile {
    pub fn from_plan(plan: &MissionPlan) -> Self {
        PlanFile {
            kind: plan.kind,
            spacing: plan.lane_spacing,
            passes: plan.passes,
            capture_radius: plan
                .waypoints
                .first()
                .map_or(crate::mission::DEFAULT_CAPTURE_RADIUS_M, |w| {
                    w.capture_radius
                }),
            waypoints: plan
                .waypoints
                .iter()
                .map(|w| [w.position.x, w.position.y])
                .collect(),
        }
    }

    pub fn into_plan(self) -> Result<MissionPlan, ConfigError> {
        if self.waypoints.len() < 2 {
            return Err(ConfigError::Invalid(
                "plan needs at least 2 waypoints".into(),
            ));
        }
        if !(self.capture_radius > 0.0) {
            return Err(ConfigError::Invalid(
                "capture_radius must be positive".into(),
            ));
        }
        if self.kind == PlanKind::Lawnmower && !self.waypoints.len().is_multiple_of(2) {
            return Err(ConfigError::Invalid(
                "lawnmower plans have an even waypoint count".into(),
            ));
        }
        let waypoints: Vec<Waypoint> = self
            .waypoints
            .iter()
            .map(|&[x, y]| Waypoint {
                position: LocalPoint::new(x, y),
                capture_radius: self.capture_radius,
            })
            .collect();
        for pair in waypoints.windows(2) {
            if pair[0].position == pair[1].position {
                return Err(ConfigError::Invalid(
                    "consecutive waypoints coincide".into(),
                ));
            }
        }
        Ok(MissionPlan {
            kind: self.kind,
            waypoints,
            lane_spacing: self.spacing,
            passes: self.passes,
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), ConfigError> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}
