use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn repo_file(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn finsler(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_finsler"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("config.toml");
    std::fs::write(&path, body).unwrap();
    path
}

const SMALL: &str = r#"
dim = 2
[[metric]]
kind = "funk"
[[metric]]
kind = "hilbert"
[grid]
radial_levels = 2
y_angles = 2
u_angles = 3
random_samples = 10
[geodesic]
count = 3
"#;

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn default_verify_passes_and_writes_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = finsler(&["verify"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&dir.path().join("report.json"));
    assert_eq!(report["pass"], Value::Bool(true));
    assert_eq!(report["failed"], 0);
    let stdout: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(stdout, report);
}

#[test]
fn anchor_outside_the_domain_is_a_config_error_with_a_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "dim = 2\n\n[[metric]]\nkind = \"shen-k0\"\nanchor = [1.5, 0.0]\n");
    let out = finsler(&["verify", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3"), "{err}");
    assert!(!dir.path().join("report.json").exists());
}

#[test]
fn malformed_inputs_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "dim = 2\n[grid\n");
    let c = cfg.to_str().unwrap();
    assert_eq!(finsler(&["verify", "--config", c], dir.path()).status.code(), Some(2));
    let missing = dir.path().join("absent.toml");
    assert_eq!(
        finsler(&["verify", "--config", missing.to_str().unwrap()], dir.path()).status.code(),
        Some(2)
    );
    assert_eq!(finsler(&["curvature", "--tol", "-1"], dir.path()).status.code(), Some(2));
    assert_eq!(finsler(&["curvature", "--jobs", "0"], dir.path()).status.code(), Some(2));
    assert_eq!(finsler(&["series"], dir.path()).status.code(), Some(2));
}

#[test]
fn negative_control_is_detected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = repo_file("configs/negative-control.toml");
    let out = finsler(&["verify", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let report = json(&dir.path().join("report.json"));
    let failed: Vec<&str> = report["records"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| r["pass"] == Value::Bool(false))
        .map(|r| r["check"].as_str().unwrap())
        .collect();
    assert!(failed.contains(&"rapcsak"), "{failed:?}");
}

#[test]
fn outputs_are_byte_identical_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let c = cfg.to_str().unwrap();
    for cmd in ["verify", "curvature", "geodesic"] {
        let a = dir.path().join(format!("{cmd}-a"));
        let b = dir.path().join(format!("{cmd}-b"));
        let ra = finsler(&[cmd, "--config", c, "--jobs", "1"], &a);
        let rb = finsler(&[cmd, "--config", c], &b);
        assert_eq!(ra.status.code(), Some(0));
        assert_eq!(ra.stdout, rb.stdout);
        for entry in std::fs::read_dir(&a).unwrap() {
            let name = entry.unwrap().file_name();
            assert_eq!(std::fs::read(a.join(&name)).unwrap(), std::fs::read(b.join(&name)).unwrap());
        }
    }
}

#[test]
fn seed_flag_changes_the_samples() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let c = cfg.to_str().unwrap();
    finsler(&["curvature", "--config", c, "--seed", "1"], &dir.path().join("s1"));
    finsler(&["curvature", "--config", c, "--seed", "2"], &dir.path().join("s2"));
    let a = std::fs::read(dir.path().join("s1/curvature.csv")).unwrap();
    let b = std::fs::read(dir.path().join("s2/curvature.csv")).unwrap();
    assert_ne!(a, b);
}

#[test]
fn curvature_csv_and_tolerance_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let c = cfg.to_str().unwrap();
    let out = finsler(&["curvature", "--config", c], &dir.path().join("ok"));
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("ok/curvature.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "metric,x1,x2,y1,y2,u1,u2,K,target,deviation,within_tol");
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row.len(), 11);
    let k: f64 = row[7].parse().unwrap();
    assert!((k + 0.25).abs() < 1e-6);
    assert_eq!(row[7].split('e').next().unwrap().chars().filter(char::is_ascii_digit).count(), 17);

    let strict = finsler(&["curvature", "--config", c, "--tol", "1e-300"], &dir.path().join("strict"));
    assert_eq!(strict.status.code(), Some(1));
}

#[test]
fn geodesic_writes_a_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[geodesic]\nspray = \"funk-spray\"\nx0 = [0.0, 0.3]\ny0 = [1.0, 0.0]\nt_end = 1.0\n",
    );
    let out = finsler(&["geodesic", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    assert!(csv.starts_with("t,x1,x2,y1,y2\n"));
    for line in csv.lines().skip(1) {
        let x2: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
        assert!((x2 - 0.3).abs() < 1e-8);
    }
    let summary = json(&dir.path().join("geodesic_summary.json"));
    assert_eq!(summary["termination"], "completed");
}

#[test]
fn series_table_converges_to_the_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = repo_file("configs/series.toml");
    let out = finsler(&["series", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("series.csv")).unwrap();
    let errors: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(errors.len(), 5);
    assert!(errors.windows(2).all(|w| w[1] < w[0]));
    assert!(*errors.last().unwrap() <= 1e-8);
}

#[test]
fn shipped_configs_parse() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["default", "ellipsoid", "series", "negative-control"] {
        let cfg = repo_file(&format!("configs/{name}.toml"));
        let out = finsler(&["geodesic", "--config", cfg.to_str().unwrap()], &dir.path().join(name));
        assert_ne!(out.status.code(), Some(2), "{name}: {}", String::from_utf8_lossy(&out.stderr));
    }
}
