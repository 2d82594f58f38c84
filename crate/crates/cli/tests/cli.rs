//! CLI behavior beyond the acceptance criteria: report schema, custom model
//! files, output redirection, and the seed environment variable.

use std::process::Command;

fn exe() -> &'static str {
    env!("CARGO_BIN_EXE_liegeom")
}

fn run(args: &[&str]) -> std::process::Output {
    Command::new(exe()).args(args).output().unwrap()
}

#[test]
fn report_emits_schema_conformant_json() {
    let out = run(&[
        "report",
        "--model",
        "euclidean:2",
        "--samples",
        "8",
        "--seed",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["config"]["seed"], 3);
    assert_eq!(doc["config"]["model"], "euclidean:2");
    let checks = doc["checks"].as_array().unwrap();
    assert!(!checks.is_empty());
    for check in checks {
        assert!(check["name"].is_string());
        assert!(check["passed"].is_boolean());
        assert!(check["max_residual"].is_number() || check["max_residual"].is_null());
        assert!(check["samples"].is_number());
        assert!(check["paper_anchor"].is_string());
    }
    // the Jacobi row carries its fixed anchor string
    let jacobi = checks
        .iter()
        .find(|c| c["name"] == "bracket_jacobi")
        .expect("jacobi check present");
    assert_eq!(jacobi["paper_anchor"], "lie_bracket_jacobi");
    assert_eq!(doc["passed"], true);
}

#[test]
fn report_runs_are_byte_identical() {
    let args = [
        "report",
        "--model",
        "euclidean:2",
        "--samples",
        "8",
        "--seed",
        "5",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout);
    assert!(!a.stdout.is_empty());
}

#[test]
fn custom_model_file_verifies() {
    let fixture = concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/tests/fixtures/line_with_two_charts.json"
    );
    let model = format!("custom:{fixture}");
    let out = run(&["verify", "--model", &model, "--samples", "8"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("manifold_compat"));
    assert!(text.contains("lie_group_certificates"));
    assert!(text.contains("overall: PASS"));
}

#[test]
fn missing_custom_file_is_a_usage_error() {
    let out = run(&["verify", "--model", "custom:/nonexistent/path.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn output_flag_writes_the_report_file() {
    let dir = std::env::temp_dir().join("liegeom-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("report.json");
    let _ = std::fs::remove_file(&path);
    let out = run(&[
        "report",
        "--model",
        "euclidean:1",
        "--samples",
        "8",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let written = std::fs::read_to_string(&path).unwrap();
    let doc: serde_json::Value = serde_json::from_str(&written).unwrap();
    assert_eq!(doc["passed"], true);
}

#[test]
fn unwritable_output_path_is_a_usage_error() {
    let out = run(&[
        "report",
        "--model",
        "euclidean:1",
        "--samples",
        "8",
        "--output",
        "/nonexistent-dir/report.json",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn seed_env_var_matches_explicit_flag() {
    let with_flag = run(&[
        "report",
        "--model",
        "euclidean:1",
        "--samples",
        "8",
        "--seed",
        "9",
    ]);
    let with_env = Command::new(exe())
        .args(["report", "--model", "euclidean:1", "--samples", "8"])
        .env("LIEGEOM_SEED", "9")
        .output()
        .unwrap();
    assert_eq!(with_flag.stdout, with_env.stdout);
}

#[test]
fn bracket_json_output_carries_both_routes() {
    let out = run(&[
        "bracket",
        "--model",
        "euclidean:2",
        "--field-x",
        "1,0",
        "--field-y",
        "0,x0",
        "--point",
        "0,0",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["coordinate_route"][0], 0.0);
    assert_eq!(doc["coordinate_route"][1], 1.0);
    assert_eq!(doc["derivation_route"][1], 1.0);
    let disc = doc["discrepancy"].as_f64().unwrap();
    assert!(disc <= 1e-6);
}

#[test]
fn bracket_of_identical_fields_vanishes() {
    let out = run(&[
        "bracket",
        "--model",
        "euclidean:2",
        "--field-x",
        "x1,x0^2",
        "--field-y",
        "x1,x0^2",
        "--point",
        "0.5,-0.25",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["coordinate_route"][0], 0.0);
    assert_eq!(doc["coordinate_route"][1], 0.0);
}

#[test]
fn order_out_of_range_is_a_usage_error() {
    let out = run(&["verify", "--model", "euclidean:1", "--order", "5"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["verify", "--model", "euclidean:1", "--tol", "0"]);
    assert_eq!(out.status.code(), Some(2));
}
