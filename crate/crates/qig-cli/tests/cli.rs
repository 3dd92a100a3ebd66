//! End-to-end tests of the `qig` binary: exit codes, file outputs,
//! determinism, and config/flag precedence.

use std::path::Path;
use std::process::{Command, Output};

fn qig(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qig"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).expect("output file exists");
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .expect("header row")
        .split(',')
        .map(str::to_string)
        .collect();
    let rows = lines
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    (header, rows)
}

fn column(header: &[String], name: &str) -> usize {
    header
        .iter()
        .position(|h| h == name)
        .unwrap_or_else(|| panic!("column {name} in {header:?}"))
}

#[test]
fn scan_single_point_emits_quarter() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("point.csv");
    let status = qig(&[
        "scan",
        "--model",
        "flux-qubit",
        "--delta",
        "1",
        "--beta",
        "2:2:1",
        "--h",
        "0:0:1",
        "--engine",
        "closed-form",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(status.status.success(), "{status:?}");
    let (header, rows) = read_csv(&out);
    assert_eq!(rows.len(), 1);
    let g_hh: f64 = rows[0][column(&header, "sjoqvist_g_hh")].parse().unwrap();
    assert!((g_hh - 0.25).abs() <= 1e-14);
    let delta_nc: f64 = rows[0][column(&header, "delta_nc")].parse().unwrap();
    assert!(delta_nc >= 0.0);
}

#[test]
fn scan_unknown_model_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let output = qig(&[
        "scan",
        "--model",
        "spin-y",
        "--beta",
        "1:2:2",
        "--h",
        "0:1:2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(2), "{output:?}");
    assert!(!out.exists());
}

#[test]
fn scan_unwritable_path_exits_3() {
    let output = qig(&[
        "scan",
        "--model",
        "spin-z",
        "--beta",
        "1:2:2",
        "--h",
        "0.5:1:2",
        "--out",
        "/nonexistent-dir/out.csv",
    ]);
    assert_eq!(output.status.code(), Some(3), "{output:?}");
}

#[test]
fn scan_degenerate_rows_are_flagged() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("degenerate.csv");
    let output = qig(&[
        "scan",
        "--model",
        "flux-qubit",
        "--delta",
        "0",
        "--beta",
        "1:1:1",
        "--h",
        "-1:1:3",
        "--engine",
        "closed-form",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{output:?}");
    let (header, rows) = read_csv(&out);
    let status_col = column(&header, "status");
    assert_eq!(rows[0][status_col], "ok");
    assert_eq!(rows[1][status_col], "degenerate");
    assert_eq!(rows[1][column(&header, "bures_g_bb")], "");
}

#[test]
fn scan_output_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let args_for = |name: &str, threads: &str| {
        vec![
            "scan".to_string(),
            "--model".into(),
            "flux-qubit".into(),
            "--beta".into(),
            "0.2:3:7".into(),
            "--h".into(),
            "-1.5:1.5:9".into(),
            "--engine".into(),
            "both".into(),
            "--threads".into(),
            threads.into(),
            "--out".into(),
            dir.path().join(name).to_str().unwrap().into(),
        ]
    };
    for (name, threads) in [("t1.csv", "1"), ("t4.csv", "4"), ("auto.csv", "auto")] {
        let args: Vec<String> = args_for(name, threads);
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        assert!(qig(&args).status.success());
    }
    let t1 = std::fs::read(dir.path().join("t1.csv")).unwrap();
    let t4 = std::fs::read(dir.path().join("t4.csv")).unwrap();
    let auto = std::fs::read(dir.path().join("auto.csv")).unwrap();
    assert_eq!(t1, t4);
    assert_eq!(t1, auto);
}

#[test]
fn scan_flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("scan.json");
    let out = dir.path().join("rows.json");
    std::fs::write(
        &config_path,
        serde_json::json!({
            "model": "flux-qubit",
            "fixed_params": {"delta": 1.0},
            "beta_range": {"start": 1.0, "stop": 1.0, "count": 1},
            "h_range": {"start": 0.5, "stop": 0.5, "count": 1},
            "engine": "closed-form",
            "format": "csv",
        })
        .to_string(),
    )
    .unwrap();
    // Override the h grid and the format.
    let output = qig(&[
        "scan",
        "--config",
        config_path.to_str().unwrap(),
        "--h",
        "0:0:1",
        "--format",
        "json",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{output:?}");
    let rows: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let row = &rows.as_array().unwrap()[0];
    assert_eq!(row["h"], 0.0);
    assert!((row["sjoqvist"]["g_hh"].as_f64().unwrap() - 0.25).abs() <= 1e-14);
}

#[test]
fn scan_generic_model_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let model_path = dir.path().join("model.json");
    let out = dir.path().join("generic.csv");
    // Tabulated spin-z-like family H(h) = diag(h/2, -h/2).
    let grid: Vec<f64> = (0..21).map(|i| 0.5 + 0.1 * i as f64).collect();
    let entries: Vec<serde_json::Value> = grid
        .iter()
        .map(|&h| serde_json::json!([[[h / 2.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [-h / 2.0, 0.0]]]))
        .collect();
    std::fs::write(
        &model_path,
        serde_json::json!({
            "dim": 2,
            "h_grid": grid,
            "H_entries": entries,
            "h_name": "omega",
        })
        .to_string(),
    )
    .unwrap();
    let output = qig(&[
        "scan",
        "--model",
        "generic",
        "--model-file",
        model_path.to_str().unwrap(),
        "--beta",
        "1:1:1",
        "--h",
        "2:2:1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{output:?}");
    let (header, rows) = read_csv(&out);
    // Same point as the spin-z closed form at (β=1, ω=2).
    let g_bb: f64 = rows[0][column(&header, "bures_g_bb")].parse().unwrap();
    assert!((g_bb - 0.10499358540350653).abs() <= 1e-8, "g_bb = {g_bb}");
}

#[test]
fn check_passes_by_default_and_fails_on_machine_tolerance() {
    let ok = qig(&["check"]);
    assert!(ok.status.success(), "{ok:?}");
    let stdout = String::from_utf8_lossy(&ok.stdout);
    assert_eq!(stdout.matches("[PASS]").count(), 12, "{stdout}");

    let negative = qig(&["check", "--tol", "1e-16"]);
    assert_eq!(negative.status.code(), Some(1), "{negative:?}");
    let stdout = String::from_utf8_lossy(&negative.stdout);
    assert!(stdout.contains("[FAIL]"));
}

#[test]
fn check_with_coarse_fd_step_still_passes() {
    let output = qig(&["check", "--fd-step", "1e-1"]);
    assert!(output.status.success(), "{output:?}");
}

#[test]
fn fig2_reproduces_intercepts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig2.csv");
    let output = qig(&["fig2", "--out", out.to_str().unwrap()]);
    assert!(output.status.success(), "{output:?}");
    let (header, rows) = read_csv(&out);
    assert_eq!(header, vec!["beta", "dg_eps1", "dg_eps1_25", "dg_eps1_5"]);
    assert_eq!(rows.len(), 201);
    let first: Vec<f64> = rows[0].iter().map(|f| f.parse().unwrap()).collect();
    assert_eq!(first[0], 0.0);
    assert!((first[1] - 0.0625).abs() <= 1e-6);
    assert!((first[2] - 0.0380725).abs() <= 1e-6);
    assert!((first[3] - 0.0236686).abs() <= 1e-6);
}

#[test]
fn limits_table_has_factor_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("limits.csv");
    let output = qig(&[
        "limits",
        "--h",
        "0:3:4",
        "--delta",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{output:?}");
    let (header, rows) = read_csv(&out);
    assert_eq!(header, vec!["eps", "limit_hh", "fs_value", "ratio"]);
    let parse = |row: &[String], col: usize| -> f64 { row[col].parse().unwrap() };
    // eps = 0, 1, 2, 3.
    assert!((parse(&rows[0], 1) - 0.25).abs() <= 1e-15);
    assert!((parse(&rows[0], 2) - 0.5).abs() <= 1e-15);
    assert!((parse(&rows[1], 1) - 0.0625).abs() <= 1e-15);
    assert!((parse(&rows[1], 2) - 0.125).abs() <= 1e-15);
    assert!((parse(&rows[3], 1) - 0.0025).abs() <= 1e-15);
    assert!((parse(&rows[3], 2) - 0.005).abs() <= 1e-15);
    for row in &rows {
        assert!((parse(row, 3) - 2.0).abs() <= 1e-12);
    }
}

#[test]
fn limits_rejects_other_models() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let output = qig(&[
        "limits",
        "--model",
        "spin-z",
        "--h",
        "0:1:2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(2), "{output:?}");
}

#[test]
fn limits_degenerate_gap_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let output = qig(&[
        "limits",
        "--h",
        "0:1:2",
        "--delta",
        "0",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(4), "{output:?}");
}
