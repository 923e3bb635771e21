use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn contagionlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_contagionlab"))
        .args(args)
        .env("CONTAGIONLAB_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

const RING3: &str = r#"{
  "model": {
    "n": 3,
    "beta": [[0.2, 0.1, 0.0], [0.0, 0.2, 0.1], [0.1, 0.0, 0.2]],
    "delta": [0.9, 0.9, 0.9],
    "w_o": [[0, 1, 0], [0, 0, 1], [1, 0, 0]]
  }
}"#;

#[test]
fn validate_echoes_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "one.json", r#"{"model": {"n": 1, "beta": [[0.3]], "delta": [0.5]}}"#);
    let v = stdout_json(&contagionlab(&["validate", "--config", &cfg]));
    assert_eq!(v["config"]["model"]["w_x"], serde_json::json!([1.0]));
    assert_eq!(v["config"]["model"]["gamma"], serde_json::json!([1.0]));
    assert_eq!(v["config"]["initial"]["x"], serde_json::json!([0.5]));

    let echo = write_config(dir.path(), "echo.json", &v["config"].to_string());
    let again = stdout_json(&contagionlab(&["validate", "--config", &echo]));
    assert_eq!(again["config"], v["config"]);
}

#[test]
fn missing_endogenous_rate_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "bad.json",
        r#"{"model": {"n": 2, "beta": [[0.3, 0.1], [0.1, 0.0]], "delta": [0.5, 0.5]}}"#,
    );
    let out = contagionlab(&["validate", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Assumption 1"));
}

#[test]
fn parse_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.json", r#"{"model": {"n": 1, "beta": [0.3], "delta": "x"}}"#);
    let out = contagionlab(&["classify", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("model.delta"));
}

#[test]
fn classify_reports_flop_asymptotic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "ring.json", RING3);
    let out = contagionlab(&["classify", "--config", &cfg]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("table1_flop_asymptotic"), "{text}");
    assert_eq!(stdout_json(&out)["flop"]["verdict"]["kind"], "asymptotically_stable");
}

#[test]
fn certify_ring_is_valid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "ring.json", RING3);
    let v = stdout_json(&contagionlab(&["certify", "--config", &cfg]));
    assert_eq!(v["lyapunov"]["valid"], true);
}

#[test]
fn scenario_star5_reaches_interior() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("star5");
    let out = contagionlab(&["scenario", "--name", "star5", "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: Value = serde_json::from_str(&fs::read_to_string(out_dir.join("summary.json")).unwrap()).unwrap();
    let t = &summary["trajectories"][0];
    assert_eq!(t["outcome"], "Interior");
    assert!((t["x"][0].as_f64().unwrap() - 0.1114).abs() < 2e-3);
    let csv = fs::read_to_string(out_dir.join("trajectory_0.csv")).unwrap();
    assert!(csv.lines().count() > 2);

    let again = contagionlab(&["scenario", "--name", "star5", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(again.status.code(), Some(2));
    let forced = contagionlab(&["scenario", "--name", "star5", "--out", out_dir.to_str().unwrap(), "--force"]);
    assert!(forced.status.success());
}

#[test]
fn unknown_scenario_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = contagionlab(&["scenario", "--name", "nope", "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_rejects_out_of_domain_start() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "bad.json",
        r#"{"model": {"n": 1, "beta": [0.3], "delta": [0.5]}, "initial": {"x": [1.2], "o": [0.5]}}"#,
    );
    let out_dir = dir.path().join("sim");
    let out = contagionlab(&["simulate", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out_dir.exists());
}

#[test]
fn mc_writes_basin_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("mc");
    let out = contagionlab(&["mc", "--name", "tipping4_exact", "--out", out_dir.to_str().unwrap(), "--seed", "7"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(out_dir.join("basin.csv")).unwrap();
    assert_eq!(csv.lines().count(), 501);
    assert!(csv.starts_with("mean_x0,mean_o0,outcome\n"));
    let summary: Value = serde_json::from_str(&fs::read_to_string(out_dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["seed"], 7);
    assert_eq!(summary["trials"], 500);
}

#[test]
fn bad_thread_count_is_rejected() {
    let out = Command::new(env!("CARGO_BIN_EXE_contagionlab"))
        .args(["scenario", "--name", "star5", "--out", "/nonexistent/never"])
        .env("CONTAGIONLAB_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
