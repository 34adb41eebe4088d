//! Survey simulator: a differential-drive catamaran following a mission plan
//! through a current field while its sensors sample synthetic scalar fields.
//!
//! The vehicle is unicycle-kinematic with the ambient current added to its
//! velocity; no hydrodynamics. Sensors emit at jitter-free multiples of their
//! nominal periods into the exact CSV schemas the ingest module reads, plus a
//! `truth.csv` ground-truth track for evaluation. A fixed RNG seed makes the
//! emitted logs byte-identical across runs.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geo::{LocalFrame, LocalPoint};
use crate::ingest::{aquatroll_spec, bathy_spec, lisst_spec, SensorSpec};
use crate::mission::{path_length, MissionPlan, Waypoint};

/// Hard bound on current magnitude; stronger configured currents are clamped
/// at evaluation so that an overpowering current times the mission out
/// instead of failing configuration.
pub const MAX_CURRENT_MPS: f64 = 2.0;

/// The parameter name carrying water depth, which the sensor-head offset
/// applies to.
pub const DEPTH_PARAM: &str = "depth_m";

/// Lowest approach speed near a waypoint, as a fraction of `v_max`. The ramp
/// cannot go to zero or any current equal to the ramped speed would park the
/// vehicle just outside the capture radius forever; 0.75 keeps capture
/// possible against currents up to about 0.7 of `v_max`.
pub const MIN_APPROACH_FRACTION: f64 = 0.75;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("no field spec for parameter '{0}'")]
    MissingField(String),
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("timed out after {t:.1} s before reaching waypoint {waypoint}")]
    Timeout { waypoint: usize, t: f64 },
}

/// One synthetic ground-truth scalar field over the local frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScalarFieldSpec {
    Constant {
        value: f64,
    },
    /// `x_slope * x + y_slope * y + offset`
    Affine {
        x_slope: f64,
        y_slope: f64,
        offset: f64,
    },
    /// Sum of Gaussian bumps over a flat base level.
    GaussianBumps {
        #[serde(default)]
        base: f64,
        bumps: Vec<Bump>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: [f64; 2],
    pub amplitude: f64,
    pub sigma: f64,
}

impl ScalarFieldSpec {
    pub fn eval(&self, p: LocalPoint) -> f64 {
        match self {
            ScalarFieldSpec::Constant { value } => *value,
            ScalarFieldSpec::Affine {
                x_slope,
                y_slope,
                offset,
            } => x_slope * p.x + y_slope * p.y + offset,
            ScalarFieldSpec::GaussianBumps { base, bumps } => {
                base + bumps
                    .iter()
                    .map(|b| {
                        let dx = p.x - b.center[0];
                        let dy = p.y - b.center[1];
                        b.amplitude * (-(dx * dx + dy * dy) / (2.0 * b.sigma * b.sigma)).exp()
                    })
                    .sum::<f64>()
            }
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if let ScalarFieldSpec::GaussianBumps { bumps, .. } = self {
            for b in bumps {
                if !(b.sigma > 0.0) {
                    return Err(SimError::InvalidConfig(format!(
                        "gaussian bump sigma {} must be positive",
                        b.sigma
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Ambient water current, uniform or affine in position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CurrentField {
    Uniform {
        v: [f64; 2],
    },
    /// `u = u0 + ux*x + uy*y`, `v = v0 + vx*x + vy*y` as `[_0, _x, _y]`.
    Affine {
        u: [f64; 3],
        v: [f64; 3],
    },
}

impl CurrentField {
    pub fn none() -> Self {
        CurrentField::Uniform { v: [0.0, 0.0] }
    }

    /// Current vector at `p`, clamped to [`MAX_CURRENT_MPS`].
    pub fn at(&self, p: LocalPoint) -> (f64, f64) {
        let (cx, cy) = match self {
            CurrentField::Uniform { v } => (v[0], v[1]),
            CurrentField::Affine { u, v } => (
                u[0] + u[1] * p.x + u[2] * p.y,
                v[0] + v[1] * p.x + v[2] * p.y,
            ),
        };
        let mag = cx.hypot(cy);
        if mag > MAX_CURRENT_MPS {
            let k = MAX_CURRENT_MPS / mag;
            (cx * k, cy * k)
        } else {
            (cx, cy)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleState {
    pub position: LocalPoint,
    pub heading: f64,
    pub speed: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Command {
    pub speed: f64,
    pub turn_rate: f64,
}

/// Sensor emission rates in Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorRates {
    pub aquatroll_hz: f64,
    pub bathy_hz: f64,
    pub lisst_hz: f64,
}

impl Default for SensorRates {
    fn default() -> Self {
        SensorRates {
            aquatroll_hz: 0.5,
            bathy_hz: 10.0,
            lisst_hz: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    /// Control step, seconds. Should divide the sensor periods so emission
    /// instants land on control steps.
    pub dt_s: f64,
    pub v_max_mps: f64,
    pub turn_rate_max_radps: f64,
    /// Proportional gain from heading error to turn rate, 1/s.
    pub heading_gain: f64,
    /// 1-sigma position noise added to logged GPS, meters per axis.
    pub gps_noise_m: f64,
    /// 1-sigma value noise per parameter name; parameters not listed are
    /// noiseless.
    pub noise_sigma: BTreeMap<String, f64>,
    pub rng_seed: u64,
    /// Epoch time of the first control step, seconds.
    pub start_epoch_s: f64,
    /// Sensor head depth below the surface; subtracted from emitted depth
    /// readings and added back by the processing pipeline.
    pub depth_offset_m: f64,
    pub rates: SensorRates,
    /// Mission abort threshold as a multiple of the ideal traversal time.
    pub timeout_factor: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            dt_s: 0.05,
            v_max_mps: 1.5,
            turn_rate_max_radps: 1.0,
            heading_gain: 1.0,
            gps_noise_m: 0.0,
            noise_sigma: BTreeMap::new(),
            rng_seed: 0,
            start_epoch_s: 0.0,
            depth_offset_m: 0.15,
            rates: SensorRates::default(),
            timeout_factor: 2.0,
        }
    }
}

impl SimConfig {
    fn validate(&self) -> Result<(), SimError> {
        if !(self.dt_s > 0.0) {
            return Err(SimError::InvalidConfig(format!("dt {} s", self.dt_s)));
        }
        if !(self.v_max_mps > 0.0) || !(self.turn_rate_max_radps > 0.0) {
            return Err(SimError::InvalidConfig(
                "v_max and turn_rate_max must be positive".into(),
            ));
        }
        if !(self.heading_gain > 0.0) {
            return Err(SimError::InvalidConfig(
                "heading_gain must be positive".into(),
            ));
        }
        if self.gps_noise_m < 0.0 || self.noise_sigma.values().any(|s| *s < 0.0) {
            return Err(SimError::InvalidConfig(
                "noise sigmas must be non-negative".into(),
            ));
        }
        for r in [
            self.rates.aquatroll_hz,
            self.rates.bathy_hz,
            self.rates.lisst_hz,
        ] {
            if !(r > 0.0) {
                return Err(SimError::InvalidConfig(format!("sensor rate {r} Hz")));
            }
        }
        Ok(())
    }
}

fn wrap_angle(a: f64) -> f64 {
    let mut a = a.rem_euclid(std::f64::consts::TAU);
    if a > std::f64::consts::PI {
        a -= std::f64::consts::TAU;
    }
    a
}

/// Unicycle update with additive current: the heading integrates the turn
/// rate, then the position integrates thrust along the new heading plus the
/// local current.
pub fn step_vehicle(
    state: &VehicleState,
    cmd: &Command,
    current: &CurrentField,
    dt: f64,
) -> VehicleState {
    let heading = wrap_angle(state.heading + cmd.turn_rate * dt);
    let (cx, cy) = current.at(state.position);
    let position = LocalPoint::new(
        state.position.x + (cmd.speed * heading.cos() + cx) * dt,
        state.position.y + (cmd.speed * heading.sin() + cy) * dt,
    );
    VehicleState {
        position,
        heading,
        speed: cmd.speed,
    }
}

/// Proportional heading controller: turn toward the waypoint at a clamped
/// rate, at full speed until inside twice the capture radius, then ramp down
/// to [`MIN_APPROACH_FRACTION`] of `v_max`.
pub fn waypoint_controller(state: &VehicleState, wp: &Waypoint, cfg: &SimConfig) -> Command {
    let bearing = (wp.position.y - state.position.y).atan2(wp.position.x - state.position.x);
    let err = wrap_angle(bearing - state.heading);
    let turn_rate =
        (cfg.heading_gain * err).clamp(-cfg.turn_rate_max_radps, cfg.turn_rate_max_radps);
    let dist = state.position.distance(wp.position);
    let ramp = (dist / (2.0 * wp.capture_radius)).clamp(MIN_APPROACH_FRACTION, 1.0);
    Command {
        speed: cfg.v_max_mps * ramp,
        turn_rate,
    }
}

/// The emitted per-sensor CSV logs, schema-identical to what the ingest
/// module parses, plus the ground-truth track.
#[derive(Debug, Clone, PartialEq)]
pub struct SurveyLogs {
    pub aquatroll: String,
    pub bathy: String,
    pub lisst: String,
    pub truth: String,
}

impl SurveyLogs {
    /// Writes `aquatroll.csv`, `bathy.csv`, `lisst.csv`, `truth.csv` into `dir`.
    pub fn write_to_dir(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("aquatroll.csv"), &self.aquatroll)?;
        std::fs::write(dir.join("bathy.csv"), &self.bathy)?;
        std::fs::write(dir.join("lisst.csv"), &self.lisst)?;
        std::fs::write(dir.join("truth.csv"), &self.truth)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurveyOutcome {
    pub logs: SurveyLogs,
    /// Simulated seconds until the final waypoint was captured.
    pub duration_s: f64,
    pub steps: usize,
    /// Largest perpendicular distance between the vehicle and the planned
    /// leg it was tracking.
    pub max_cross_track_m: f64,
}

struct Emitter {
    spec: SensorSpec,
    count: u64,
    log: String,
}

impl Emitter {
    fn new(spec: SensorSpec) -> Self {
        let mut log = spec.header().join(",");
        log.push('\n');
        Emitter {
            spec,
            count: 0,
            log,
        }
    }

    fn next_due(&self) -> f64 {
        self.count as f64 / self.spec.nominal_rate_hz
    }
}

/// Runs the plan to completion, emitting sensor logs.
///
/// `fields` must hold a [`ScalarFieldSpec`] for every parameter of every
/// sensor. With all noise at zero, each logged value is exactly the field at
/// the vehicle's true position (less the depth offset for `depth_m`), and the
/// logged GPS is the true position.
pub fn run_survey(
    plan: &MissionPlan,
    fields: &BTreeMap<String, ScalarFieldSpec>,
    current: &CurrentField,
    frame: &LocalFrame,
    cfg: &SimConfig,
) -> Result<SurveyOutcome, SimError> {
    cfg.validate()?;
    if plan.waypoints.len() < 2 {
        return Err(SimError::InvalidConfig(
            "plan needs at least two waypoints".into(),
        ));
    }
    let mut emitters = [
        Emitter::new(aquatroll_spec(cfg.rates.aquatroll_hz)),
        Emitter::new(bathy_spec(cfg.rates.bathy_hz)),
        Emitter::new(lisst_spec(cfg.rates.lisst_hz)),
    ];
    for em in &emitters {
        for (name, _) in &em.spec.parameters {
            let spec = fields
                .get(name)
                .ok_or_else(|| SimError::MissingField(name.clone()))?;
            spec.validate()?;
        }
    }
    if let Some(depth) = fields.get(DEPTH_PARAM) {
        check_depth_nonnegative(depth, &plan.waypoints)?;
    }

    let wps = &plan.waypoints;
    let timeout_s = cfg.timeout_factor
        * (path_length(plan) / cfg.v_max_mps
            + wps.len() as f64 * std::f64::consts::PI / cfg.turn_rate_max_radps);

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut state = VehicleState {
        position: wps[0].position,
        heading: {
            let (a, b) = (wps[0].position, wps[1].position);
            (b.y - a.y).atan2(b.x - a.x)
        },
        speed: 0.0,
    };
    let mut truth = String::from("t_epoch_s,x_m,y_m,heading_rad\n");
    let mut wi = 0usize;
    let mut max_cross_track = 0.0_f64;
    let mut step = 0usize;
    let duration_s;

    loop {
        let t_rel = step as f64 * cfg.dt_s;
        if t_rel > timeout_s {
            return Err(SimError::Timeout {
                waypoint: wi,
                t: t_rel,
            });
        }

        for em in &mut emitters {
            while em.next_due() <= t_rel + 1e-9 {
                let t = cfg.start_epoch_s + em.next_due();
                emit_row(em, t, &state, fields, frame, cfg, &mut rng);
                em.count += 1;
            }
        }
        let _ = writeln!(
            truth,
            "{},{},{},{}",
            cfg.start_epoch_s + t_rel,
            state.position.x,
            state.position.y,
            state.heading
        );

        while wi < wps.len() && state.position.distance(wps[wi].position) <= wps[wi].capture_radius
        {
            wi += 1;
        }
        if wi == wps.len() {
            duration_s = t_rel;
            break;
        }

        if wi > 0 {
            max_cross_track = max_cross_track.max(segment_distance(
                wps[wi - 1].position,
                wps[wi].position,
                state.position,
            ));
        }
        let cmd = waypoint_controller(&state, &wps[wi], cfg);
        state = step_vehicle(&state, &cmd, current, cfg.dt_s);
        step += 1;
    }

    let [aqua, bathy, lisst] = emitters;
    Ok(SurveyOutcome {
        logs: SurveyLogs {
            aquatroll: aqua.log,
            bathy: bathy.log,
            lisst: lisst.log,
            truth,
        },
        duration_s,
        steps: step,
        max_cross_track_m: max_cross_track,
    })
}

fn emit_row(
    em: &mut Emitter,
    t: f64,
    state: &VehicleState,
    fields: &BTreeMap<String, ScalarFieldSpec>,
    frame: &LocalFrame,
    cfg: &SimConfig,
    rng: &mut ChaCha8Rng,
) {
    let gx: f64 = StandardNormal.sample(rng);
    let gy: f64 = StandardNormal.sample(rng);
    let logged = LocalPoint::new(
        state.position.x + cfg.gps_noise_m * gx,
        state.position.y + cfg.gps_noise_m * gy,
    );
    let geo = frame.unproject(logged);
    let _ = write!(em.log, "{},{},{}", t, geo.lat, geo.lon);
    for (name, _) in &em.spec.parameters {
        let z: f64 = StandardNormal.sample(rng);
        let sigma = cfg.noise_sigma.get(name).copied().unwrap_or(0.0);
        let mut value = fields[name].eval(state.position) + sigma * z;
        if name == DEPTH_PARAM {
            value -= cfg.depth_offset_m;
        }
        let _ = write!(em.log, ",{value}");
    }
    em.log.push('\n');
}

/// The depth field must stay non-negative over the surveyed area; a shallow
/// grid over the waypoint bounding box catches sign errors in field configs.
fn check_depth_nonnegative(depth: &ScalarFieldSpec, wps: &[Waypoint]) -> Result<(), SimError> {
    let xs = wps.iter().map(|w| w.position.x);
    let ys = wps.iter().map(|w| w.position.y);
    let (min_x, max_x) = (
        xs.clone().fold(f64::INFINITY, f64::min),
        xs.fold(f64::NEG_INFINITY, f64::max),
    );
    let (min_y, max_y) = (
        ys.clone().fold(f64::INFINITY, f64::min),
        ys.fold(f64::NEG_INFINITY, f64::max),
    );
    let steps = 16;
    for i in 0..=steps {
        for j in 0..=steps {
            let p = LocalPoint::new(
                min_x + (max_x - min_x) * i as f64 / steps as f64,
                min_y + (max_y - min_y) * j as f64 / steps as f64,
            );
            let d = depth.eval(p);
            if d < 0.0 {
                return Err(SimError::InvalidConfig(format!(
                    "depth field is negative ({d:.3} m) at ({:.1}, {:.1})",
                    p.x, p.y
                )));
            }
        }
    }
    Ok(())
}

fn segment_distance(a: LocalPoint, b: LocalPoint, p: LocalPoint) -> f64 {
    let len2 = (b.x - a.x).powi(2) + (b.y - a.y).powi(2);
    if len2 == 0.0 {
        return a.distance(p);
    }
    let t = (((p.x - a.x) * (b.x - a.x) + (p.y - a.y) * (b.y - a.y)) / len2).clamp(0.0, 1.0);
    p.distance(LocalPoint::new(
        a.x + t * (b.x - a.x),
        a.y + t * (b.y - a.y),
    ))
}
