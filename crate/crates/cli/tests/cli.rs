use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn glv(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_glv")).args(args).current_dir(dir).output().expect("glv runs")
}

fn with_config(dir: &Path, body: &str) -> String {
    let p = dir.join("config.json");
    fs::write(&p, body).unwrap();
    p.display().to_string()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn solve_at_zero_field_gives_unit_state() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = with_config(dir.path(), r#"{"d": 3.0, "n": 16, "mu": 0.0}"#);
    let out = glv(&["solve", "--config", &cfg, "--out", "run"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let s = json(&dir.path().join("run/solution.json"));
    assert!((s["energy"].as_f64().unwrap() + 1.0).abs() < 1e-12);
    assert_eq!(s["isotropy"], "D4");
    assert_eq!(s["total_vorticity"], 0);
    let m = json(&dir.path().join("run/manifest.json"));
    assert_eq!(m["status"], "ok");
    assert!(dir.path().join("run/pattern_amp.pgm").exists());
    assert!(!dir.path().join("run/FAILED").exists());
}

#[test]
fn invalid_configs_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    for body in [r#"{"n": 3}"#, r#"{"mu_window": [1.0, 0.0]}"#, r#"{"unknown_key": 1}"#, "not json"] {
        let cfg = with_config(dir.path(), body);
        let out = glv(&["solve", "--config", &cfg, "--out", "run"], dir.path());
        assert_eq!(out.status.code(), Some(2), "config {body}");
    }
    let out = glv(&["solve", "--config", "missing.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = glv(&["frobnicate"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_with_one_and_marks_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = with_config(
        dir.path(),
        r#"{"n": 16, "mu": 1.0, "guess": {"kind": "vortices", "centers": [[0.3, 0.2, 3]]}, "newton": {"max_iter": 1}}"#,
    );
    let out = glv(&["solve", "--config", &cfg, "--out", "run"], dir.path());
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("run/FAILED").exists());
    assert_eq!(json(&dir.path().join("run/manifest.json"))["status"], "failed");
}

#[test]
fn verify_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = glv(&["verify", "--out", "run", "--seed", "3"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let v = json(&dir.path().join("run/verify.json"));
    assert!(v.as_array().unwrap().iter().all(|c| c["passed"] == true));
}

#[test]
fn eigen_reports_the_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = with_config(dir.path(), r#"{"n": 12, "mu": 0.5, "eigen_count": 4}"#);
    let out = glv(&["eigen", "--config", &cfg, "--out", "run"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("run/eigenvalues.csv")).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "index,eigenvalue,residual");
    assert_eq!(rows.len(), 5);
}

#[test]
fn trace_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = with_config(
        dir.path(),
        r#"{"n": 16, "mu": 1.4, "mu_window": [1.3, 1.75], "continuation": {"ds_max": 0.1}, "write_patterns": false}"#,
    );
    for run in ["a", "b"] {
        let out = glv(&["trace", "--config", &cfg, "--out", run, "--seed", "5"], dir.path());
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for name in ["branch_A.csv", "bifurcations.csv"] {
        let a = fs::read(dir.path().join("a").join(name)).unwrap();
        let b = fs::read(dir.path().join("b").join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between runs");
    }
    let table = fs::read_to_string(dir.path().join("a/bifurcations.csv")).unwrap();
    let first = table.lines().nth(1).expect("a bifurcation on A");
    let cols: Vec<&str> = first.split(',').collect();
    let mu: f64 = cols[2].parse().unwrap();
    assert!((mu - 1.646).abs() < 0.1, "point 1 at {mu}");
    assert_eq!(cols[4], "2");
    assert!(dir.path().join("a/bif_A_0.json").exists());
}
