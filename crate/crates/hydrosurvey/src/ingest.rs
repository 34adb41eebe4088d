//! Sensor log ingestion and multi-rate synchronization.
//!
//! Each sensor writes its own CSV log (header row required, comma separated,
//! UTF-8, `.` decimal separator, empty cell = missing value):
//!
//! ```text
//! aquatroll.csv: t_epoch_s, lat_deg, lon_deg, ph, temp_c, nitrate_mg_l, pressure_psi, baro_mmhg, orp_mv, chl_rfu
//! bathy.csv:     t_epoch_s, lat_deg, lon_deg, depth_m
//! lisst.csv:     t_epoch_s, lat_deg, lon_deg, sediment_mg_l
//! tides.csv:     peak_epoch_s, height_ft, kind (high|low)
//! ```
//!
//! Because the sensors run at different rates, [`synchronize`] builds one
//! record per sample of a chosen reference stream (by convention the slowest,
//! the 0.5 Hz sonde): every other stream contributes its nearest-in-time
//! sample when that sample lies within one nominal period, and a missing
//! value otherwise. Values are copied bit-for-bit, never interpolated;
//! positions come from GPS fixes, time-interpolated where a reference sample
//! lacks its own fix.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geo::{GeoPoint, LocalFrame, LocalPoint};

pub const AQUATROLL_ID: &str = "aquatroll";
pub const BATHY_ID: &str = "bathy";
pub const LISST_ID: &str = "lisst";

/// Records within this many seconds of a tidal peak (inclusive) are
/// attributed to that tide; 1.5 hours.
pub const DEFAULT_TIDE_WINDOW_S: f64 = 5400.0;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("line {line}: timestamp {t} goes backwards (previous {prev})")]
    NonMonotonicTime { line: u64, t: f64, prev: f64 },
    #[error("configuration: {0}")]
    Configuration(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// What a sensor measures and how fast it nominally samples.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorSpec {
    pub sensor_id: String,
    /// `(name, unit)` pairs; names are unique within the sensor.
    pub parameters: Vec<(String, String)>,
    pub nominal_rate_hz: f64,
}

impl SensorSpec {
    pub fn new(
        sensor_id: &str,
        parameters: &[(&str, &str)],
        nominal_rate_hz: f64,
    ) -> Result<Self, IngestError> {
        if !(nominal_rate_hz > 0.0) {
            return Err(IngestError::Configuration(format!(
                "sensor {sensor_id}: rate {nominal_rate_hz} Hz must be positive"
            )));
        }
        let mut seen = std::collections::BTreeSet::new();
        for (name, _) in parameters {
            if !seen.insert(*name) {
                return Err(IngestError::Configuration(format!(
                    "sensor {sensor_id}: duplicate parameter {name}"
                )));
            }
        }
        Ok(SensorSpec {
            sensor_id: sensor_id.to_string(),
            parameters: parameters
                .iter()
                .map(|(n, u)| (n.to_string(), u.to_string()))
                .collect(),
            nominal_rate_hz,
        })
    }

    pub fn nominal_period_s(&self) -> f64 {
        1.0 / self.nominal_rate_hz
    }

    /// CSV header for this sensor's log.
    pub fn header(&self) -> Vec<String> {
        let mut h = vec![
            "t_epoch_s".to_string(),
            "lat_deg".to_string(),
            "lon_deg".to_string(),
        ];
        h.extend(self.parameters.iter().map(|(n, _)| n.clone()));
        h
    }
}

/// The multiparameter water-quality sonde (pH, temperature, nitrate,
/// pressure, barometric pressure, ORP, chlorophyll-a fluorescence).
pub fn aquatroll_spec(rate_hz: f64) -> SensorSpec {
    SensorSpec::new(
        AQUATROLL_ID,
        &[
            ("ph", "pH"),
            ("temp_c", "degC"),
            ("nitrate_mg_l", "mg/L"),
            ("pressure_psi", "psi"),
            ("baro_mmhg", "mmHg"),
            ("orp_mv", "mV"),
            ("chl_rfu", "RFU"),
        ],
        rate_hz,
    )
    .expect("static spec")
}

/// The echosounder depth logger.
pub fn bathy_spec(rate_hz: f64) -> SensorSpec {
    SensorSpec::new(BATHY_ID, &[("depth_m", "m")], rate_hz).expect("static spec")
}

/// The acoustic suspended-sediment sensor.
pub fn lisst_spec(rate_hz: f64) -> SensorSpec {
    SensorSpec::new(LISST_ID, &[("sediment_mg_l", "mg/L")], rate_hz).expect("static spec")
}

/// One timestamped reading, optionally position-stamped.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorSample {
    /// Epoch seconds, fractional.
    pub t: f64,
    pub geo: Option<GeoPoint>,
    /// Present parameter values; missing parameters are simply absent.
    pub values: BTreeMap<String, f64>,
}

/// A time-ordered series of samples from one sensor.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleStream {
    pub spec: SensorSpec,
    pub samples: Vec<SensorSample>,
}

/// Parses a sensor log against its spec.
///
/// Rows sharing a timestamp collapse to the last occurrence; a timestamp
/// that moves backwards is an error naming the offending line.
pub fn parse_log(reader: impl Read, spec: &SensorSpec) -> Result<SampleStream, IngestError> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(reader);

    let expected = spec.header();
    let mut samples: Vec<SensorSample> = Vec::new();
    let mut saw_header = false;
    for result in csv.records() {
        let record = result.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line());
        if !saw_header {
            let got: Vec<&str> = record.iter().collect();
            if got != expected.iter().map(String::as_str).collect::<Vec<_>>() {
                return Err(IngestError::Parse {
                    line,
                    message: format!(
                        "header mismatch for sensor {}: expected {:?}, got {:?}",
                        spec.sensor_id, expected, got
                    ),
                });
            }
            saw_header = true;
            continue;
        }
        if record.len() != expected.len() {
            return Err(IngestError::Parse {
                line,
                message: format!("expected {} columns, got {}", expected.len(), record.len()),
            });
        }
        let t = parse_field(&record, 0, "t_epoch_s", line)?.ok_or(IngestError::Parse {
            line,
            message: "t_epoch_s is required".into(),
        })?;
        let lat = parse_field(&record, 1, "lat_deg", line)?;
        let lon = parse_field(&record, 2, "lon_deg", line)?;
        let geo = match (lat, lon) {
            (Some(lat), Some(lon)) => {
                let g = GeoPoint { lat, lon };
                g.validate().map_err(|e| IngestError::Parse {
                    line,
                    message: e.to_string(),
                })?;
                Some(g)
            }
            (None, None) => None,
            _ => {
                return Err(IngestError::Parse {
                    line,
                    message: "lat_deg and lon_deg must both be present or both empty".into(),
                })
            }
        };
        let mut values = BTreeMap::new();
        for (i, (name, _)) in spec.parameters.iter().enumerate() {
            if let Some(v) = parse_field(&record, 3 + i, name, line)? {
                values.insert(name.clone(), v);
            }
        }

        let sample = SensorSample { t, geo, values };
        match samples.last() {
            Some(prev) if prev.t == t => {
                *samples.last_mut().unwrap() = sample; // duplicate timestamp: last wins
            }
            Some(prev) if prev.t > t => {
                return Err(IngestError::NonMonotonicTime {
                    line,
                    t,
                    prev: prev.t,
                });
            }
            _ => samples.push(sample),
        }
    }
    if !saw_header {
        return Err(IngestError::Parse {
            line: 1,
            message: format!("empty log for sensor {}", spec.sensor_id),
        });
    }
    Ok(SampleStream {
        spec: spec.clone(),
        samples,
    })
}

pub fn parse_log_file(path: &Path, spec: &SensorSpec) -> Result<SampleStream, IngestError> {
    parse_log(std::fs::File::open(path)?, spec)
}

fn parse_field(
    record: &csv::StringRecord,
    idx: usize,
    name: &str,
    line: u64,
) -> Result<Option<f64>, IngestError> {
    let raw = record.get(idx).unwrap_or("");
    if raw.is_empty() {
        return Ok(None);
    }
    let v: f64 = raw.parse().map_err(|_| IngestError::Parse {
        line,
        message: format!("column '{name}': invalid number '{raw}'"),
    })?;
    if !v.is_finite() {
        return Err(IngestError::Parse {
            line,
            message: format!("column '{name}': non-finite value '{raw}'"),
        });
    }
    Ok(Some(v))
}

fn csv_error(e: csv::Error) -> IngestError {
    let line = e.position().map_or(0, |p| p.line());
    IngestError::Parse {
        line,
        message: e.to_string(),
    }
}

/// Whether a tide table event marks high or low water.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TideKind {
    High,
    Low,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TideEvent {
    pub peak_t: f64,
    pub height_ft: f64,
    pub kind: TideKind,
}

/// Time-ordered tidal peaks.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TideTable {
    pub events: Vec<TideEvent>,
}

impl TideTable {
    pub fn new(mut events: Vec<TideEvent>) -> Result<Self, IngestError> {
        for e in &events {
            if !e.peak_t.is_finite() || !e.height_ft.is_finite() {
                return Err(IngestError::Configuration("non-finite tide event".into()));
            }
        }
        events.sort_by(|a, b| a.peak_t.partial_cmp(&b.peak_t).unwrap());
        Ok(TideTable { events })
    }
}

/// Parses a `tides.csv` table.
pub fn parse_tides(reader: impl Read) -> Result<TideTable, IngestError> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut events = Vec::new();
    let mut saw_header = false;
    for result in csv.records() {
        let record = result.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line());
        if !saw_header {
            let got: Vec<&str> = record.iter().collect();
            if got != ["peak_epoch_s", "height_ft", "kind"] {
                return Err(IngestError::Parse {
                    line,
                    message: format!("tide header mismatch: got {got:?}"),
                });
            }
            saw_header = true;
            continue;
        }
        let peak_t = parse_field(&record, 0, "peak_epoch_s", line)?.ok_or(IngestError::Parse {
            line,
            message: "peak_epoch_s is required".into(),
        })?;
        let height_ft = parse_field(&record, 1, "height_ft", line)?.ok_or(IngestError::Parse {
            line,
            message: "height_ft is required".into(),
        })?;
        let kind = match record.get(2).unwrap_or("") {
            "high" => TideKind::High,
            "low" => TideKind::Low,
            other => {
                return Err(IngestError::Parse {
                    line,
                    message: format!("kind must be high|low, got '{other}'"),
                })
            }
        };
        events.push(TideEvent {
            peak_t,
            height_ft,
            kind,
        });
    }
    TideTable::new(events)
}

pub fn parse_tides_file(path: &Path) -> Result<TideTable, IngestError> {
    parse_tides(std::fs::File::open(path)?)
}

/// Tidal condition attributed to a record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tide {
    High,
    Low,
    Untagged,
}

impl From<TideKind> for Tide {
    fn from(kind: TideKind) -> Self {
        match kind {
            TideKind::High => Tide::High,
            TideKind::Low => Tide::Low,
        }
    }
}

/// One fused observation: reference timestamp, projected position, every
/// sensor's nearest valid values, and the tidal condition.
#[derive(Debug, Clone, PartialEq)]
pub struct SynchronizedRecord {
    pub t: f64,
    pub position: LocalPoint,
    pub values: BTreeMap<String, f64>,
    pub tide: Tide,
}

impl SynchronizedRecord {
    pub fn value(&self, parameter: &str) -> Option<f64> {
        self.values.get(parameter).copied()
    }
}

/// Where record positions come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PositionSource {
    /// GPS fixes carried on the reference stream, falling back to fixes
    /// pooled from all streams when the reference has none.
    #[default]
    Reference,
    /// GPS fixes pooled from every stream.
    Pooled,
}

/// Fuses multi-rate streams onto the reference stream's timestamps.
pub fn synchronize(
    streams: &[SampleStream],
    reference_id: &str,
    frame: &LocalFrame,
    source: PositionSource,
) -> Result<Vec<SynchronizedRecord>, IngestError> {
    let reference = streams
        .iter()
        .find(|s| s.spec.sensor_id == reference_id)
        .ok_or_else(|| {
            IngestError::Configuration(format!("reference stream '{reference_id}' not supplied"))
        })?;

    let own_fixes: Vec<(f64, GeoPoint)> = stream_fixes(reference);
    let fixes: Vec<(f64, GeoPoint)> = match source {
        PositionSource::Reference if !own_fixes.is_empty() => own_fixes,
        _ => {
            let mut pooled: Vec<(f64, GeoPoint)> = streams.iter().flat_map(stream_fixes).collect();
            pooled.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            pooled
        }
    };
    if fixes.is_empty() {
        return Err(IngestError::Configuration(
            "no GPS fixes available on any stream".into(),
        ));
    }

    let others: Vec<&SampleStream> = streams
        .iter()
        .filter(|s| s.spec.sensor_id != reference_id)
        .collect();

    let mut records = Vec::with_capacity(reference.samples.len());
    for sample in &reference.samples {
        let geo = match (source, sample.geo) {
            (PositionSource::Reference, Some(g)) => g,
            _ => interpolate_fix(&fixes, sample.t),
        };
        let mut values = sample.values.clone();
        for stream in &others {
            if let Some(near) = nearest_sample(&stream.samples, sample.t) {
                if (near.t - sample.t).abs() <= stream.spec.nominal_period_s() {
                    for (k, v) in &near.values {
                        values.insert(k.clone(), *v);
                    }
                }
            }
        }
        records.push(SynchronizedRecord {
            t: sample.t,
            position: frame.project(geo),
            values,
            tide: Tide::Untagged,
        });
    }
    Ok(records)
}

fn stream_fixes(stream: &SampleStream) -> Vec<(f64, GeoPoint)> {
    stream
        .samples
        .iter()
        .filter_map(|s| s.geo.map(|g| (s.t, g)))
        .collect()
}

/// Linear time-interpolation between surrounding fixes, clamped at the ends.
fn interpolate_fix(fixes: &[(f64, GeoPoint)], t: f64) -> GeoPoint {
    let hi = fixes.partition_point(|&(ft, _)| ft < t);
    if hi == 0 {
        return fixes[0].1;
    }
    if hi == fixes.len() {
        return fixes[fixes.len() - 1].1;
    }
    let (t0, g0) = fixes[hi - 1];
    let (t1, g1) = fixes[hi];
    if t1 == t0 {
        return g1;
    }
    let w = (t - t0) / (t1 - t0);
    GeoPoint {
        lat: g0.lat + w * (g1.lat - g0.lat),
        lon: g0.lon + w * (g1.lon - g0.lon),
    }
}

/// The sample nearest in time to `t`; earlier sample wins exact ties.
fn nearest_sample(samples: &[SensorSample], t: f64) -> Option<&SensorSample> {
    if samples.is_empty() {
        return None;
    }
    let hi = samples.partition_point(|s| s.t < t);
    if hi == 0 {
        return Some(&samples[0]);
    }
    if hi == samples.len() {
        return Some(&samples[samples.len() - 1]);
    }
    let (before, after) = (&samples[hi - 1], &samples[hi]);
    if (t - before.t) <= (after.t - t) {
        Some(before)
    } else {
        Some(after)
    }
}

/// Tags each record with the nearest tidal peak within `window_s` seconds
/// (inclusive); exact midpoints between two peaks go to the earlier one.
pub fn tag_tide(
    records: Vec<SynchronizedRecord>,
    tides: &TideTable,
    window_s: f64,
) -> Vec<SynchronizedRecord> {
    records
        .into_iter()
        .map(|mut r| {
            r.tide = tide_at(r.t, tides, window_s);
            r
        })
        .collect()
}

/// The tide condition attributed to time `t` under the given table.
pub fn tide_at(t: f64, tides: &TideTable, window_s: f64) -> Tide {
    let mut best: Option<(f64, TideKind)> = None;
    for e in &tides.events {
        let d = (t - e.peak_t).abs();
        match best {
            Some((bd, _)) if bd <= d => {}
            _ => best = Some((d, e.kind)),
        }
    }
    match best {
        Some((d, kind)) if d <= window_s => kind.into(),
        _ => Tide::Untagged,
    }
}
