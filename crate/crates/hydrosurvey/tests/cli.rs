//! Command-line behavior: happy path, exit codes, and byte-level determinism.

use std::path::Path;
use std::process::{Command, Output};

fn hydrosurvey(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hydrosurvey"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn assert_exit(out: &Output, code: i32) {
    assert_eq!(
        out.status.code(),
        Some(code),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn read(dir: &Path, rel: &str) -> Vec<u8> {
    std::fs::read(dir.join(rel)).unwrap_or_else(|e| panic!("read {rel}: {e}"))
}

/// init -> plan -> simulate -> grid/profile/correlate/summarize, all exit 0
/// and leave the promised artifacts behind.
#[test]
fn full_workflow() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();

    assert_exit(&hydrosurvey(dir, &["init"]), 0);
    assert!(dir.join("config.json").exists());
    assert!(dir.join("tides.csv").exists());

    // shrink the reach so the simulated run stays quick
    patch_config(dir, |cfg| {
        cfg["mission"]["spacing_m"] = serde_json::json!(10.0);
    });

    assert_exit(&hydrosurvey(dir, &["plan"]), 0);
    let plan: serde_json::Value =
        serde_json::from_slice(&read(dir, "plan.json")).expect("valid plan json");
    assert_eq!(plan["kind"], "lawnmower");
    assert!(plan["waypoints"].as_array().unwrap().len() >= 8);

    assert_exit(&hydrosurvey(dir, &["simulate"]), 0);
    for log in ["aquatroll.csv", "bathy.csv", "lisst.csv", "truth.csv"] {
        assert!(dir.join(log).exists(), "missing {log}");
        assert!(read(dir, log).len() > 100, "{log} is empty");
    }

    assert_exit(
        &hydrosurvey(dir, &["grid", "--logs", ".", "--parameter", "depth_m"]),
        0,
    );
    let asc = String::from_utf8(read(dir, "depth_m.asc")).unwrap();
    let mut lines = asc.lines();
    assert!(lines.next().unwrap().starts_with("ncols "));
    assert!(lines.next().unwrap().starts_with("nrows "));
    assert!(lines.next().unwrap().starts_with("xllcorner "));
    assert!(lines.next().unwrap().starts_with("yllcorner "));
    assert!(lines.next().unwrap().starts_with("cellsize "));
    assert_eq!(lines.next().unwrap(), "NODATA_value -9999");

    assert_exit(&hydrosurvey(dir, &["summarize", "--logs", "."]), 0);
    let summary = String::from_utf8(read(dir, "summary.csv")).unwrap();
    assert!(summary.starts_with("parameter,count,min,max,max_deviation,mean\n"));
    assert!(summary.lines().count() > 5);

    assert_exit(&hydrosurvey(dir, &["correlate", "--logs", "."]), 0);
    let corr = String::from_utf8(read(dir, "correlations.csv")).unwrap();
    assert!(corr.starts_with("param_x,param_y,tide_group,n,r\n"));
    // template pairs, pooled + high + low each
    assert_eq!(corr.lines().count(), 1 + 3 * 3);
    // the simulated run sits inside the low-tide window
    assert!(corr
        .lines()
        .any(|l| l.contains(",low,") && !l.ends_with(',')));
}

/// Transect workflow: plan, simulate, profile.
#[test]
fn transect_profile_workflow() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    assert_exit(&hydrosurvey(dir, &["init"]), 0);
    patch_config(dir, |cfg| {
        cfg["mission"]["kind"] = serde_json::json!("transect");
        cfg["mission"]["passes"] = serde_json::json!(2);
    });
    assert_exit(&hydrosurvey(dir, &["plan"]), 0);
    let plan: serde_json::Value = serde_json::from_slice(&read(dir, "plan.json")).unwrap();
    assert_eq!(plan["waypoints"].as_array().unwrap().len(), 3);

    assert_exit(&hydrosurvey(dir, &["simulate"]), 0);
    assert_exit(&hydrosurvey(dir, &["profile", "--logs", "."]), 0);
    let profile = String::from_utf8(read(dir, "profile.csv")).unwrap();
    assert!(profile.starts_with("station_m,depth_m\n"));
    assert!(profile.lines().count() > 10);
}

#[test]
fn invalid_spacing_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    assert_exit(&hydrosurvey(dir, &["init"]), 0);
    patch_config(dir, |cfg| {
        cfg["mission"]["spacing_m"] = serde_json::json!(0.0);
    });
    assert_exit(&hydrosurvey(dir, &["plan"]), 2);
}

#[test]
fn unknown_parameter_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    assert_exit(&hydrosurvey(dir, &["init"]), 0);
    assert_exit(
        &hydrosurvey(dir, &["grid", "--logs", ".", "--parameter", "xyz"]),
        2,
    );
}

#[test]
fn overpowering_current_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    assert_exit(&hydrosurvey(dir, &["init"]), 0);
    patch_config(dir, |cfg| {
        cfg["current"] = serde_json::json!({"kind": "uniform", "v": [10.0, 0.0]});
        cfg["sim"]["v_max_mps"] = serde_json::json!(1.0);
    });
    assert_exit(&hydrosurvey(dir, &["plan"]), 0);
    assert_exit(&hydrosurvey(dir, &["simulate"]), 3);
}

#[test]
fn degenerate_scatter_exits_4() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    assert_exit(&hydrosurvey(dir, &["init"]), 0);
    // two positioned samples only: not enough to triangulate
    std::fs::write(
        dir.join("aquatroll.csv"),
        "t_epoch_s,lat_deg,lon_deg,ph,temp_c,nitrate_mg_l,pressure_psi,baro_mmhg,orp_mv,chl_rfu\n\
         0,39.9437,-75.1997,7.9,29,120,14.7,8,200,0.4\n\
         2,39.9438,-75.1996,7.9,29,120,14.7,8,200,0.4\n",
    )
    .unwrap();
    assert_exit(
        &hydrosurvey(dir, &["grid", "--logs", ".", "--parameter", "ph"]),
        4,
    );
}

/// Same config and seed produce byte-identical log directories; a different
/// seed does not.
#[test]
fn simulate_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    assert_exit(&hydrosurvey(dir, &["init"]), 0);
    patch_config(dir, |cfg| {
        cfg["mission"]["spacing_m"] = serde_json::json!(20.0);
    });
    assert_exit(&hydrosurvey(dir, &["plan"]), 0);

    std::fs::create_dir(dir.join("a")).unwrap();
    std::fs::create_dir(dir.join("b")).unwrap();
    let run = |out: &str| {
        let s = hydrosurvey(
            dir,
            &[
                "--out",
                out,
                "simulate",
                "--plan",
                "plan.json",
                "--seed",
                "99",
            ],
        );
        assert_exit(&s, 0);
    };
    run("a");
    run("b");
    for log in ["aquatroll.csv", "bathy.csv", "lisst.csv", "truth.csv"] {
        assert_eq!(
            read(dir, &format!("a/{log}")),
            read(dir, &format!("b/{log}")),
            "{log} differs between identically-seeded runs"
        );
    }

    std::fs::create_dir(dir.join("c")).unwrap();
    let s = hydrosurvey(
        dir,
        &[
            "--out",
            "c",
            "simulate",
            "--plan",
            "plan.json",
            "--seed",
            "100",
        ],
    );
    assert_exit(&s, 0);
    assert_ne!(read(dir, "a/bathy.csv"), read(dir, "c/bathy.csv"));
}

/// Commands do not mutate their inputs, and reprocessing identical logs gives
/// identical products.
#[test]
fn processing_is_idempotent_and_input_preserving() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    assert_exit(&hydrosurvey(dir, &["init"]), 0);
    patch_config(dir, |cfg| {
        cfg["mission"]["spacing_m"] = serde_json::json!(20.0);
    });
    assert_exit(&hydrosurvey(dir, &["plan"]), 0);
    assert_exit(&hydrosurvey(dir, &["simulate"]), 0);

    let before = read(dir, "bathy.csv");
    std::fs::create_dir(dir.join("g1")).unwrap();
    std::fs::create_dir(dir.join("g2")).unwrap();
    assert_exit(
        &hydrosurvey(
            dir,
            &[
                "--out",
                "g1",
                "grid",
                "--logs",
                ".",
                "--parameter",
                "depth_m",
            ],
        ),
        0,
    );
    assert_exit(
        &hydrosurvey(
            dir,
            &[
                "--out",
                "g2",
                "grid",
                "--logs",
                ".",
                "--parameter",
                "depth_m",
            ],
        ),
        0,
    );
    assert_eq!(read(dir, "g1/depth_m.asc"), read(dir, "g2/depth_m.asc"));
    assert_eq!(
        before,
        read(dir, "bathy.csv"),
        "grid must not touch its inputs"
    );
}

/// Correlating two runs appends run-mean rows.
#[test]
fn multi_run_correlation_reports_run_means() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    assert_exit(&hydrosurvey(dir, &["init"]), 0);
    patch_config(dir, |cfg| {
        cfg["mission"]["spacing_m"] = serde_json::json!(20.0);
    });
    assert_exit(&hydrosurvey(dir, &["plan"]), 0);
    std::fs::create_dir(dir.join("run1")).unwrap();
    std::fs::create_dir(dir.join("run2")).unwrap();
    assert_exit(
        &hydrosurvey(dir, &["--out", "run1", "simulate", "--plan", "plan.json"]),
        0,
    );
    assert_exit(
        &hydrosurvey(
            dir,
            &[
                "--out",
                "run2",
                "simulate",
                "--plan",
                "plan.json",
                "--seed",
                "8",
            ],
        ),
        0,
    );
    assert_exit(
        &hydrosurvey(dir, &["correlate", "--logs", "run1", "run2"]),
        0,
    );
    let corr = String::from_utf8(read(dir, "correlations.csv")).unwrap();
    assert_eq!(corr.lines().filter(|l| l.contains(",run_mean,")).count(), 3);
}

fn patch_config(dir: &Path, edit: impl FnOnce(&mut serde_json::Value)) {
    let path = dir.join("config.json");
    let mut cfg: serde_json::Value =
        serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    edit(&mut cfg);
    std::fs::write(&path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
}
