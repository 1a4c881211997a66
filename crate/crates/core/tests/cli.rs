//! End-to-end checks of the command-line interface and its exit codes.

use std::process::Command;

const BIN: &str = env!("CARGO_BIN_EXE_bochner-compact");

fn write_scenario(dir: &std::path::Path, name: &str, body: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn analyze_writes_report_and_curves() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_scenario(
        dir.path(),
        "s.json",
        r#"{
            "schema_version": 1,
            "family": {"name": "rotating", "params": {"atoms": 16, "period": 10}, "prefix_length": 40},
            "analyses": [
                {"kind": "ui_modulus", "p": 2.0, "r_grid": [0.5, 1.0, 2.0]},
                {"kind": "certify_ui", "p": 2.0, "eps": 0.1}
            ]
        }"#,
    );
    let out = dir.path().join("out");
    let status = Command::new(BIN)
        .args(["analyze", "--scenario"])
        .arg(&scenario)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(status.status.success());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["results"].as_array().unwrap().len(), 2);
    let csv = std::fs::read_to_string(out.join("ui_modulus.csv")).unwrap();
    assert!(csv.starts_with("r,modulus\n"));
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn extract_refuses_with_exit_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_scenario(
        dir.path(),
        "s.json",
        r#"{
            "schema_version": 1,
            "family": {"name": "mass_escape", "params": {"atoms": 12, "dim": 1}, "prefix_length": 12},
            "analyses": [{"kind": "theorem1", "p": 1.0, "eps": 0.2, "r": 4.0}]
        }"#,
    );
    let out = Command::new(BIN)
        .args(["extract", "--scenario"])
        .arg(&scenario)
        .args(["--epsilon", "0.2", "--p", "1.0", "--r", "4.0"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("refusal"));
}

#[test]
fn invalid_input_exits_with_1() {
    let out = Command::new(BIN)
        .args(["analyze", "--scenario", "/nonexistent/s.json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let bad = write_scenario(dir.path(), "bad.json", "{ not json");
    let out = Command::new(BIN)
        .args(["analyze", "--scenario"])
        .arg(&bad)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn remark_reports_scalar_image() {
    let out = Command::new(BIN)
        .args([
            "remark",
            "--level",
            "4",
            "--c",
            "3,4",
            "--y",
            "5",
            "--resolution",
            "0.01",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let payload: serde_json::Value =
        serde_json::from_slice(&out.stdout).unwrap();
    assert!(payload["scalar_image_check"]["coverage_gap"].as_f64().unwrap() <= 1e-2 + 1e-12);
    assert!(payload["member_count"].as_u64().unwrap() > 0);
}

#[test]
fn csv_format_flattens_report() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_scenario(
        dir.path(),
        "s.json",
        r#"{
            "schema_version": 1,
            "family": {"name": "constant", "params": {"atoms": 4, "dim": 2}, "prefix_length": 5},
            "analyses": [{"kind": "certify_tightness", "p": 1.0, "eps": 0.5}]
        }"#,
    );
    let out = Command::new(BIN)
        .args(["certify-tightness", "--scenario"])
        .arg(&scenario)
        .args(["--epsilon", "0.5", "--p", "1.0", "--format", "csv"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.starts_with("key,value\n"));
    assert!(text.contains("certificate"));
}
