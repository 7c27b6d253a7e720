//! End-to-end runs of the `ofdelay` binary.

use std::path::Path;
use std::process::{Command, Output};

fn ofdelay(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ofdelay"))
        .args(args)
        .output()
        .expect("run ofdelay")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

const SCENARIO: &str = r#"{ "scenario": {
  "switches": [
    { "lambda": 20000, "service": { "p_packet_in": 0.1, "mu1": 32000, "mu2": 64000 } },
    { "lambda": 30000, "service": { "p_packet_in": 0.1, "mu1": 32000, "mu2": 64000 } }
  ],
  "controller": { "mu_c": 256000 } } }
"#;

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn analyze_prints_per_switch_and_controller_delays() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "net.json", SCENARIO);
    let out = ofdelay(&["analyze", &file]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("3.684476e-5"), "{text}");
    assert!(text.contains("lambda_c = 5000"), "{text}");

    let out = ofdelay(&["analyze", "--json", &file]);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["lambda_c"], 5000.0);
    assert_eq!(report["per_switch"].as_array().unwrap().len(), 2);
}

#[test]
fn validate_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(dir.path(), "good.json", SCENARIO);
    let out = ofdelay(&["validate", &good]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).starts_with("ok"));

    let bad = write(
        dir.path(),
        "bad.json",
        &SCENARIO.replacen("\"lambda\": 20000", "\"lambda\": 0", 1),
    );
    let out = ofdelay(&["validate", &bad]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("switch 0"), "{}", stderr(&out));

    let unstable = write(
        dir.path(),
        "unstable.json",
        &SCENARIO.replacen("\"lambda\": 30000", "\"lambda\": 70000", 1),
    );
    assert_eq!(ofdelay(&["validate", &unstable]).status.code(), Some(1));
    assert_eq!(ofdelay(&["analyze", &unstable]).status.code(), Some(1));

    let typo = write(dir.path(), "typo.json", &SCENARIO.replace("mu_c", "mu_k"));
    let out = ofdelay(&["validate", &typo]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("typo.json:6:"), "{}", stderr(&out));

    let missing = dir.path().join("missing.json");
    assert_eq!(
        ofdelay(&["validate", missing.to_str().unwrap()]).status.code(),
        Some(2)
    );
}

#[test]
fn sweep_prints_csv() {
    let out = ofdelay(&["sweep", "--preset", "fig5"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("p,lambda,E_T_si_s,utilization,stable"));
    assert_eq!(lines.count(), 21 * 3);
    assert!(!text.contains('\r'));
}

#[test]
fn emit_writes_plot_data() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig6.dat");
    let out = ofdelay(&[
        "emit",
        "--preset",
        "fig6",
        "--format",
        "plot-data",
        "--ms",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = std::fs::read_to_string(&path).unwrap();
    let header = text.lines().next().unwrap();
    assert_eq!(header.split(',').count(), 4, "{header}");
    assert!(header.starts_with("n,"));
    assert_eq!(text.lines().count(), 51);
}

#[test]
fn emit_to_unwritable_path_is_an_io_error() {
    let out = ofdelay(&[
        "emit",
        "--preset",
        "fig5",
        "--format",
        "csv",
        "--out",
        "/nonexistent/dir/out.csv",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("/nonexistent/dir/out.csv"));
}

#[test]
fn preset_file_drives_a_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let out = ofdelay(&["show-preset", "fig8"]);
    let spec = write(dir.path(), "fig8.json", &stdout(&out));
    let from_file = ofdelay(&["sweep", "--spec", &spec]);
    let from_preset = ofdelay(&["sweep", "--preset", "fig8"]);
    assert_eq!(from_file.status.code(), Some(0));
    assert_eq!(from_file.stdout, from_preset.stdout);
}

#[test]
fn simulated_sweep_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(
        dir.path(),
        "small.json",
        r#"{ "sweep": { "preset": "fig5", "series_lambda": [30000],
              "range": { "start": 0, "stop": 1, "step": 0.5 } } }"#,
    );
    let args = ["sweep", "--spec", &spec, "--simulate", "--packets", "20000", "--seed", "7"];
    let a = ofdelay(&args);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(a.stdout, ofdelay(&args).stdout);
    let text = stdout(&a);
    assert!(text.lines().next().unwrap().contains("sim_E_T_si_s"));
    assert_eq!(text.lines().count(), 4);

    let other = ofdelay(&["sweep", "--spec", &spec, "--simulate", "--packets", "20000", "--seed", "8"]);
    assert_ne!(a.stdout, other.stdout);
}

#[test]
fn usage_errors() {
    assert_eq!(ofdelay(&["sweep"]).status.code(), Some(2));
    assert_eq!(ofdelay(&["sweep", "--preset", "fig7"]).status.code(), Some(2));
    assert_eq!(ofdelay(&["emit", "--preset", "fig5", "--format", "csv"]).status.code(), Some(2));
}
