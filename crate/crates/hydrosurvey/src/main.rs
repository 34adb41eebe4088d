use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use hydrosurvey::config::{ConfigError, PlanFile, RunConfig};
use hydrosurvey::geo::GeoError;
use hydrosurvey::ingest::{
    aquatroll_spec, bathy_spec, lisst_spec, parse_log_file, tag_tide, IngestError, SampleStream,
    SynchronizedRecord,
};
use hydrosurvey::interp::{chord_project, cross_section, rasterize, InterpError, ScatterSet};
use hydrosurvey::mission::MissionError;
use hydrosurvey::sim::{run_survey, SimError, DEPTH_PARAM};
use hydrosurvey::stats::{correlate_pairs, correlate_run_means, summarize, StatsError};

/// Plan, simulate, and process small-boat river surveys.
#[derive(Parser)]
#[command(name = "hydrosurvey", version, about)]
struct Cli {
    /// Run configuration JSON.
    #[arg(long, global = true, default_value = "config.json")]
    config: PathBuf,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Override the configured simulation RNG seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a template config.json and tides.csv into the output directory.
    Init,
    /// Build the configured mission plan and write plan.json.
    Plan,
    /// Run the survey simulator over the plan, writing sensor logs.
    Simulate {
        /// Mission plan file; defaults to <out>/plan.json.
        #[arg(long)]
        plan: Option<PathBuf>,
    },
    /// Interpolate one parameter onto an ESRI ASCII grid.
    Grid {
        /// Directory holding the sensor logs.
        #[arg(long)]
        logs: PathBuf,
        /// Parameter to grid (e.g. depth_m, temp_c).
        #[arg(long)]
        parameter: String,
    },
    /// Reconstruct the riverbed cross-section along the transect chord.
    Profile {
        #[arg(long)]
        logs: PathBuf,
    },
    /// Emit Pearson correlation tables: pooled, per tide, and per-run means
    /// when several log directories are given.
    Correlate {
        #[arg(long, required = true, num_args = 1..)]
        logs: Vec<PathBuf>,
    },
    /// Summarize parameters (count, min, max, max deviation, mean).
    Summarize {
        #[arg(long)]
        logs: PathBuf,
        /// Single parameter; all parameters when omitted.
        #[arg(long)]
        parameter: Option<String>,
    },
}

enum AppError {
    Config(ConfigError),
    Ingest(IngestError),
    Sim(SimError),
    Interp(InterpError),
    Stats(StatsError),
    Io(std::io::Error),
    Usage(String),
}

impl AppError {
    /// 2 = configuration/parameter error, 3 = simulation failure,
    /// 4 = data degeneracy.
    fn exit_code(&self) -> u8 {
        match self {
            AppError::Config(_) | AppError::Ingest(_) | AppError::Io(_) | AppError::Usage(_) => 2,
            AppError::Sim(SimError::Timeout { .. }) => 3,
            AppError::Sim(_) => 2,
            AppError::Interp(InterpError::InvalidParameter(_)) => 2,
            AppError::Interp(_) => 4,
            AppError::Stats(StatsError::EmptyInput(_)) => 4,
            AppError::Stats(_) => 2,
        }
    }
}

impl fmt::Display for AppError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AppError::Config(e) => write!(f, "{e}"),
            AppError::Ingest(e) => write!(f, "{e}"),
            AppError::Sim(e) => write!(f, "{e}"),
            AppError::Interp(e) => write!(f, "{e}"),
            AppError::Stats(e) => write!(f, "{e}"),
            AppError::Io(e) => write!(f, "{e}"),
            AppError::Usage(m) => write!(f, "{m}"),
        }
    }
}

macro_rules! from_err {
    ($variant:ident, $ty:ty) => {
        impl From<$ty> for AppError {
            fn from(e: $ty) -> Self {
                AppError::$variant(e)
            }
        }
    };
}
from_err!(Config, ConfigError);
from_err!(Ingest, IngestError);
from_err!(Sim, SimError);
from_err!(Interp, InterpError);
from_err!(Stats, StatsError);
from_err!(Io, std::io::Error);

impl From<MissionError> for AppError {
    fn from(e: MissionError) -> Self {
        AppError::Config(ConfigError::Mission(e))
    }
}

impl From<GeoError> for AppError {
    fn from(e: GeoError) -> Self {
        AppError::Config(ConfigError::Geo(e))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), AppError> {
    std::fs::create_dir_all(&cli.out)?;
    match &cli.command {
        Command::Init => cmd_init(&cli),
        Command::Plan => cmd_plan(&cli),
        Command::Simulate { plan } => cmd_simulate(&cli, plan.as_deref()),
        Command::Grid { logs, parameter } => cmd_grid(&cli, logs, parameter),
        Command::Profile { logs } => cmd_profile(&cli, logs),
        Command::Correlate { logs } => cmd_correlate(&cli, logs),
        Command::Summarize { logs, parameter } => cmd_summarize(&cli, logs, parameter.as_deref()),
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, AppError> {
    let mut cfg = RunConfig::load(&cli.config)?;
    if let Some(seed) = cli.seed {
        cfg.sim.rng_seed = seed;
    }
    Ok(cfg)
}

fn cmd_init(cli: &Cli) -> Result<(), AppError> {
    let config_path = cli.out.join("config.json");
    let tides_path = cli.out.join("tides.csv");
    std::fs::write(&config_path, RunConfig::template().to_json_pretty()?)?;
    std::fs::write(&tides_path, RunConfig::template_tides_csv())?;
    println!("wrote {}", config_path.display());
    println!("wrote {}", tides_path.display());
    Ok(())
}

fn cmd_plan(cli: &Cli) -> Result<(), AppError> {
    let cfg = load_config(cli)?;
    let plan = cfg.build_plan()?;
    let path = cli.out.join("plan.json");
    PlanFile::from_plan(&plan).save(&path)?;
    println!(
        "wrote {} ({} waypoints, {:.1} m path)",
        path.display(),
        plan.waypoints.len(),
        hydrosurvey::mission::path_length(&plan)
    );
    Ok(())
}

fn cmd_simulate(cli: &Cli, plan_path: Option<&Path>) -> Result<(), AppError> {
    let cfg = load_config(cli)?;
    let default_plan = cli.out.join("plan.json");
    let plan = PlanFile::load(plan_path.unwrap_or(&default_plan))?.into_plan()?;
    let frame = cfg.frame()?;
    let outcome = run_survey(&plan, &cfg.fields, &cfg.current, &frame, &cfg.sim)?;
    outcome.logs.write_to_dir(&cli.out)?;
    println!(
        "simulated {:.1} s, max cross-track {:.2} m; logs in {}",
        outcome.duration_s,
        outcome.max_cross_track_m,
        cli.out.display()
    );
    Ok(())
}

/// Parses whichever sensor logs exist in `dir`; at least one is required.
fn load_streams(cfg: &RunConfig, dir: &Path) -> Result<Vec<SampleStream>, AppError> {
    let specs = [
        aquatroll_spec(cfg.sim.rates.aquatroll_hz),
        bathy_spec(cfg.sim.rates.bathy_hz),
        lisst_spec(cfg.sim.rates.lisst_hz),
    ];
    let mut streams = Vec::new();
    for spec in specs {
        let path = dir.join(format!("{}.csv", spec.sensor_id));
        if path.exists() {
            streams.push(parse_log_file(&path, &spec)?);
        }
    }
    if streams.is_empty() {
        return Err(AppError::Usage(format!(
            "no sensor logs found in {}",
            dir.display()
        )));
    }
    Ok(streams)
}

/// Full ingest pipeline: parse, synchronize, tide-tag, and apply the
/// sensor-head depth correction.
fn synchronized_records(cfg: &RunConfig, dir: &Path) -> Result<Vec<SynchronizedRecord>, AppError> {
    let streams = load_streams(cfg, dir)?;
    let frame = cfg.frame()?;
    let records = hydrosurvey::ingest::synchronize(
        &streams,
        &cfg.reference_id(),
        &frame,
        cfg.sensors.position_source,
    )?;
    let mut records = tag_tide(records, &cfg.tide_table()?, cfg.tides.window_s);
    for r in &mut records {
        if let Some(d) = r.values.get_mut(DEPTH_PARAM) {
            *d += cfg.sim.depth_offset_m;
        }
    }
    Ok(records)
}

fn known_parameters(cfg: &RunConfig) -> Vec<String> {
    let mut names = Vec::new();
    for spec in [
        aquatroll_spec(cfg.sim.rates.aquatroll_hz),
        bathy_spec(cfg.sim.rates.bathy_hz),
        lisst_spec(cfg.sim.rates.lisst_hz),
    ] {
        names.extend(spec.parameters.iter().map(|(n, _)| n.clone()));
    }
    names
}

fn cmd_grid(cli: &Cli, logs: &Path, parameter: &str) -> Result<(), AppError> {
    let cfg = load_config(cli)?;
    if !known_parameters(&cfg).iter().any(|p| p == parameter) {
        return Err(AppError::Usage(format!(
            "unknown parameter '{parameter}'; expected one of {:?}",
            known_parameters(&cfg)
        )));
    }
    let records = synchronized_records(&cfg, logs)?;
    let mut points = Vec::new();
    let mut values = Vec::new();
    for r in &records {
        if let Some(v) = r.value(parameter) {
            points.push(r.position);
            values.push(v);
        }
    }
    let scatter = ScatterSet::new(points, values)?;
    let grid = rasterize(&scatter, cfg.interp.cell_m, None)?;
    let path = cli.out.join(format!("{parameter}.asc"));
    std::fs::write(&path, grid.to_esri_ascii())?;
    println!(
        "wrote {} ({}x{} cells, {} unmasked)",
        path.display(),
        grid.nx,
        grid.ny,
        grid.unmasked_count()
    );
    Ok(())
}

fn cmd_profile(cli: &Cli, logs: &Path) -> Result<(), AppError> {
    let cfg = load_config(cli)?;
    let bathy_path = logs.join("bathy.csv");
    if !bathy_path.exists() {
        return Err(AppError::Interp(InterpError::EmptyInput(format!(
            "no bathymetry log at {}",
            bathy_path.display()
        ))));
    }
    let stream = parse_log_file(&bathy_path, &bathy_spec(cfg.sim.rates.bathy_hz))?;
    let frame = cfg.frame()?;
    let (a, b) = cfg.transect_chord()?;

    let mut positions = Vec::new();
    let mut depths = Vec::new();
    for s in &stream.samples {
        if let (Some(geo), Some(d)) = (s.geo, s.values.get(DEPTH_PARAM)) {
            positions.push(frame.project(geo));
            depths.push(d + cfg.sim.depth_offset_m);
        }
    }
    if positions.is_empty() {
        return Err(AppError::Interp(InterpError::EmptyInput(
            "bathymetry log has no positioned depth samples".into(),
        )));
    }
    let projected = chord_project(a, b, &positions)?;
    let track: Vec<(f64, f64)> = projected
        .iter()
        .zip(&depths)
        .map(|(p, &d)| (p.along, d))
        .collect();
    let max_lateral = projected
        .iter()
        .map(|p| p.lateral.abs())
        .fold(0.0_f64, f64::max);

    let profile = cross_section(&[track], cfg.interp.station_step_m, cfg.interp.window_m)?;
    let mut out = String::from("station_m,depth_m\n");
    for (s, d) in profile.stations.iter().zip(&profile.depths) {
        out.push_str(&format!("{s},{d}\n"));
    }
    let path = cli.out.join("profile.csv");
    std::fs::write(&path, out)?;
    println!(
        "wrote {} ({} stations, max lateral deviation {:.2} m)",
        path.display(),
        profile.stations.len(),
        max_lateral
    );
    Ok(())
}

fn cmd_correlate(cli: &Cli, logs: &[PathBuf]) -> Result<(), AppError> {
    let cfg = load_config(cli)?;
    let pairs: Vec<(String, String)> = cfg
        .stats
        .pairs
        .iter()
        .map(|[x, y]| (x.clone(), y.clone()))
        .collect();

    let mut runs = Vec::new();
    for dir in logs {
        runs.push(synchronized_records(&cfg, dir)?);
    }
    let pooled: Vec<SynchronizedRecord> = runs.iter().flatten().cloned().collect();
    let mut entries = correlate_pairs(&pooled, &pairs, cfg.stats.group_by_tide);
    if runs.len() > 1 {
        entries.extend(correlate_run_means(&runs, &pairs));
    }

    let mut out = String::from("param_x,param_y,tide_group,n,r\n");
    for e in &entries {
        let r = e.r.map(|v| format!("{v}")).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{r}\n",
            e.param_x,
            e.param_y,
            e.group.label(),
            e.n
        ));
    }
    let path = cli.out.join("correlations.csv");
    std::fs::write(&path, out)?;
    println!("wrote {} ({} entries)", path.display(), entries.len());
    Ok(())
}

fn cmd_summarize(cli: &Cli, logs: &Path, parameter: Option<&str>) -> Result<(), AppError> {
    let cfg = load_config(cli)?;
    let known = known_parameters(&cfg);
    let records = synchronized_records(&cfg, logs)?;

    let targets: Vec<String> = match parameter {
        Some(p) => {
            if !known.iter().any(|k| k == p) {
                return Err(AppError::Usage(format!("unknown parameter '{p}'")));
            }
            vec![p.to_string()]
        }
        None => known,
    };

    let mut out = String::from("parameter,count,min,max,max_deviation,mean\n");
    let mut rows = 0;
    for name in &targets {
        match summarize(&records, name) {
            Ok(row) => {
                out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    row.parameter, row.count, row.min, row.max, row.max_deviation, row.mean
                ));
                rows += 1;
            }
            Err(StatsError::EmptyInput(_)) if parameter.is_none() => {} // absent sensor
            Err(e) => return Err(e.into()),
        }
    }
    if rows == 0 {
        return Err(AppError::Stats(StatsError::EmptyInput(targets.join(","))));
    }
    let path = cli.out.join("summary.csv");
    std::fs::write(&path, out)?;
    println!("wrote {} ({rows} parameters)", path.display());
    Ok(())
}
