//! End-to-end tests of the `qunit` binary: exit codes, error messages, file
//! formats, and the run/analyze pipeline equivalence.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn qunit() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qunit"))
}

fn repo_path(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn run_ok(args: &[&str]) -> Output {
    let out = qunit().args(args).output().expect("binary runs");
    assert!(
        out.status.success(),
        "command {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

#[test]
fn run_then_analyze_reproduces_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("tomo");
    run_ok(&[
        "run",
        "--config",
        repo_path("configs/tomography.json").to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    let inline_report = fs::read_to_string(out_dir.join("report.json")).unwrap();

    let analyzed = run_ok(&[
        "analyze",
        "--input",
        out_dir.join("counts.csv").to_str().unwrap(),
        "--seed",
        "3",
    ]);
    let analyzed_report = String::from_utf8(analyzed.stdout).unwrap();
    assert_eq!(
        inline_report, analyzed_report,
        "analyze must reproduce the in-process report byte for byte"
    );
}

#[test]
fn full_run_report_contains_all_blocks() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("full");
    run_ok(&[
        "run",
        "--config",
        repo_path("configs/full.json").to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("report.json")).unwrap()).unwrap();
    let v = report["V"].as_f64().unwrap();
    let s = report["S"].as_f64().unwrap();
    assert!((v - 0.956).abs() < 0.03, "V = {v}");
    assert!((s - 2.70).abs() < 0.15, "S = {s}");
    assert!(report["rho"].as_str().unwrap().starts_with("dim=4"));
    assert!(report["F"].as_f64().unwrap() > 0.9);
    assert!(report["F_err"].as_f64().unwrap() > 0.0);

    // Analyze of the combined CSV reproduces the same merged report.
    let analyzed = run_ok(&[
        "analyze",
        "--input",
        out_dir.join("counts.csv").to_str().unwrap(),
        "--seed",
        "6",
    ]);
    assert_eq!(
        fs::read_to_string(out_dir.join("report.json")).unwrap(),
        String::from_utf8(analyzed.stdout).unwrap()
    );
}

#[test]
fn missing_field_exits_2_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"experiment": "fringe"}"#).unwrap();
    let out = qunit()
        .args(["run", "--config", cfg.to_str().unwrap(), "--out", "x"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("seed"), "stderr: {stderr}");
}

#[test]
fn unknown_config_field_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(
        &cfg,
        r#"{"experiment": "fringe", "seed": 1, "fringe": {"n_pointz": 5}}"#,
    )
    .unwrap();
    let out = qunit()
        .args(["run", "--config", cfg.to_str().unwrap(), "--out", "x"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("n_pointz"));
}

#[test]
fn malformed_csv_exits_2_with_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("bad.csv");
    fs::write(
        &csv,
        "setting,i,j,counts,acc_estimate,T\nfringe:0,0,0,5,0.1,10\nfringe:0,0,oops,5,0.1,10\n",
    )
    .unwrap();
    let out = qunit()
        .args(["analyze", "--input", csv.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line 3"), "stderr: {stderr}");
}

#[test]
fn hand_built_perfect_fringe_gives_unit_visibility() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("perfect.csv");
    let mut text = String::from("setting,i,j,counts,acc_estimate,T\n");
    for k in 0..12 {
        let phi = std::f64::consts::TAU * k as f64 / 12.0;
        let cc = (750.0 * (1.0 + phi.cos()) / 2.0).round() as u64;
        for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            let c = if (i, j) == (0, 0) { cc } else { 0 };
            text.push_str(&format!("fringe:{phi},{i},{j},{c},0.25,10\n"));
        }
    }
    fs::write(&csv, text).unwrap();
    let out = run_ok(&["analyze", "--input", csv.to_str().unwrap()]);
    let report: serde_json::Value =
        serde_json::from_str(&String::from_utf8(out.stdout).unwrap()).unwrap();
    let v = report["V"].as_f64().unwrap();
    assert!(v > 0.99, "V = {v}");
    // Corrected minima dip below zero and get floored, with the flag set.
    let flags = report["flags"].as_array().unwrap();
    assert!(
        flags.iter().any(|f| f.as_str() == Some("corrected_min_floored")),
        "flags: {flags:?}"
    );
}

#[test]
fn reck_compiles_matrix_files_to_mesh_files() {
    let dir = tempfile::tempdir().unwrap();
    // 4-mode Fourier multiport written through the core serializer.
    let f = qunit_core::multiport::fourier_matrix(4).unwrap();
    let matrix_path = dir.path().join("fourier4.txt");
    fs::write(&matrix_path, qunit_core::linalg::matrix_to_text(&f)).unwrap();
    let mesh_path = dir.path().join("fourier4.mesh");
    run_ok(&[
        "reck",
        "--input",
        matrix_path.to_str().unwrap(),
        "--out",
        mesh_path.to_str().unwrap(),
    ]);
    let mesh = qunit_core::multiport::ReckMesh::from_text(
        &fs::read_to_string(&mesh_path).unwrap(),
    )
    .unwrap();
    assert_eq!(mesh.cells.len(), 6);
    let rebuilt = qunit_core::multiport::mesh_to_unitary(&mesh);
    assert!(qunit_core::linalg::max_abs_diff(&rebuilt, &f) < 1e-10);
}

#[test]
fn reck_rejects_non_unitary_with_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let mut m = qunit_core::linalg::identity(3);
    m[[0, 0]] = qunit_core::Complex64::new(1.5, 0.0);
    let path = dir.path().join("bad.txt");
    fs::write(&path, qunit_core::linalg::matrix_to_text(&m)).unwrap();
    let out = qunit()
        .args(["reck", "--input", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not unitary"));
}

#[test]
fn epr_subcommand_reports_perfect_tables() {
    let out = run_ok(&["epr", "--dim", "4"]);
    let json: serde_json::Value =
        serde_json::from_str(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(json["dim"], 4);
    assert_eq!(json["perfect"], true);
    assert_eq!(json["tables"].as_array().unwrap().len(), 4);
}

#[test]
fn seed_override_changes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let cfg = repo_path("configs/chsh.json");
    run_ok(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        a.to_str().unwrap(),
    ]);
    run_ok(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "999",
        "--out",
        b.to_str().unwrap(),
    ]);
    let ca = fs::read_to_string(a.join("counts.csv")).unwrap();
    let cb = fs::read_to_string(b.join("counts.csv")).unwrap();
    assert_ne!(ca, cb, "different seeds must change sampled counts");
}

#[test]
fn phaselock_subcommand_runs_lock_section() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("lock");
    run_ok(&[
        "phaselock",
        "--config",
        repo_path("configs/phaselock.json").to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    let csv = fs::read_to_string(out_dir.join("lock.csv")).unwrap();
    assert!(csv.starts_with("t,true_error,actuator,wrapped\n"));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("phaselock.json")).unwrap())
            .unwrap();
    assert!(summary["rms_error_rad"].as_f64().unwrap() < 0.1);
}
