use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_opinion-lab")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn fails(args: &[&str]) -> String {
    let out = run(args);
    assert!(!out.status.success(), "{args:?} unexpectedly succeeded");
    String::from_utf8(out.stderr).unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn dir_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn graph_reports_closed_form_spectra() {
    let tmp = tempfile::tempdir().unwrap();
    let out = dir_str(tmp.path());
    ok(&["graph", "--kind", "complete", "--n", "50", "--out-dir", out]);
    let report = json(&tmp.path().join("graph.json"));
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["config"]["kind"], "complete");
    let lambda = report["result"]["spectral"]["lambda"].as_f64().unwrap();
    assert!((lambda - 1.0 / 49.0).abs() < 1e-6);

    ok(&["graph", "--kind", "cycle", "--n", "101", "--out-dir", out]);
    let lambda = json(&tmp.path().join("graph.json"))["result"]["spectral"]["lambda"].as_f64().unwrap();
    assert!((lambda - (PI / 101.0).cos()).abs() < 1e-6);
}

#[test]
fn graph_rejects_odd_degree_sum() {
    let err = fails(&["graph", "--kind", "random-regular", "--n", "5", "--d", "3"]);
    assert!(err.contains("even"), "{err}");
}

#[test]
fn small_graph_report_has_exact_conductance_and_reloads() {
    let tmp = tempfile::tempdir().unwrap();
    let out = dir_str(tmp.path());
    ok(&["graph", "--kind", "random-regular", "--n", "12", "--d", "3", "--seed", "4", "--out-dir", out]);
    let report = json(&tmp.path().join("graph.json"));
    let r = &report["result"];
    let phi = r["exact_conductance"].as_f64().unwrap();
    assert!(r["spectral"]["phi_lower"].as_f64().unwrap() <= phi);

    let edges = tmp.path().join("graph.edges");
    let again = tmp.path().join("again");
    ok(&["graph", "--graph-file", edges.to_str().unwrap(), "--out-dir", dir_str(&again)]);
    assert_eq!(json(&again.join("graph.json"))["result"]["exact_conductance"].as_f64(), Some(phi));
}

#[test]
fn simulate_validation_names_fields() {
    let err = fails(&[
        "simulate", "--kind", "complete", "--n", "10", "--rule", "voter", "--q0", "0.8", "--q1", "0.2", "--a0", "3",
        "--trials", "0", "--seed", "1",
    ]);
    assert!(err.contains("trials"), "{err}");
    let err = fails(&["simulate", "--kind", "complete", "--n", "10", "--rule", "voter", "--a0", "3", "--trials", "5"]);
    assert!(err.contains("--seed"), "{err}");
}

const SIM: &[&str] = &[
    "simulate", "--kind", "random-regular", "--n", "128", "--d", "4", "--rule", "voter", "--q0", "0.8", "--q1", "0.2",
    "--a0", "10", "--trials", "30", "--seed", "12", "--trajectory",
];

#[test]
fn simulate_is_reproducible_across_workers_and_from_its_output() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let c = tmp.path().join("c");
    let line = ok(&[SIM, &["--workers", "1", "--out-dir", dir_str(&a)]].concat());
    assert!(line.starts_with("simulate: n=128 A0=10 trials=30"), "{line}");
    ok(&[SIM, &["--workers", "4", "--out-dir", dir_str(&b)]].concat());
    let summary = a.join("summary.json");
    ok(&["simulate", "--config", summary.to_str().unwrap(), "--out-dir", dir_str(&c)]);
    for f in ["trials.csv", "trajectories.csv", "summary.json"] {
        let first = fs::read(a.join(f)).unwrap();
        assert_eq!(first, fs::read(b.join(f)).unwrap(), "{f} differs across workers");
        assert_eq!(first, fs::read(c.join(f)).unwrap(), "{f} differs on rerun");
    }
    let s = json(&summary);
    assert_eq!(s["kind"], "simulate");
    assert_eq!(s["result"]["trials"], 30);
    assert!(s["config"]["graph"]["seed"].is_u64());
}

#[test]
fn format_flag_limits_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    ok(&[SIM, &["--format", "json", "--out-dir", dir_str(tmp.path())]].concat());
    assert!(tmp.path().join("summary.json").exists());
    assert!(!tmp.path().join("trials.csv").exists());
}

#[test]
fn sweep_endpoints() {
    let tmp = tempfile::tempdir().unwrap();
    ok(&[
        "sweep", "--kind", "complete", "--n", "60", "--rule", "two-choices", "--q0", "0.8", "--q1", "0.2", "--trials",
        "10", "--seed", "3", "--fractions", "0,1", "--out-dir", dir_str(tmp.path()),
    ]);
    let s = json(&tmp.path().join("sweep.json"));
    let freqs: Vec<f64> = s["result"]["points"].as_array().unwrap().iter().map(|p| p["win1_frequency"].as_f64().unwrap()).collect();
    assert_eq!(freqs, [0.0, 1.0]);
    assert_eq!(s["config"]["fractions"], serde_json::json!([0.0, 1.0]));
    let csv = fs::read_to_string(tmp.path().join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 3);
}

#[test]
fn scaling_emits_rows_and_fit() {
    let tmp = tempfile::tempdir().unwrap();
    let stdout = ok(&[
        "scaling", "--d", "8", "--rule", "voter", "--q0", "0.9", "--q1", "0.1", "--clog", "12", "--trials", "20",
        "--seed", "5", "--sizes", "512,1024,2048,4096", "--out-dir", dir_str(tmp.path()),
    ]);
    assert_eq!(stdout.lines().filter(|l| l.starts_with("scaling:")).count(), 4);
    assert!(stdout.contains("fit: median_step ="));
    let s = json(&tmp.path().join("scaling.json"));
    assert_eq!(s["result"]["rows"].as_array().unwrap().len(), 4);
    assert!(s["result"]["slope"].is_f64());
    let csv = fs::read_to_string(tmp.path().join("scaling.csv")).unwrap();
    assert!(csv.contains("# fit: median_step"));
}

#[test]
fn drift_check_passes_and_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let stdout = ok(&[
        "drift-check", "--kind", "random-regular", "--n", "80", "--d", "6", "--q0", "0.5", "--q1", "0.5", "--rules",
        "voter", "--states", "5", "--replays", "1000", "--seed", "2", "--out-dir", dir_str(tmp.path()),
    ]);
    assert!(stdout.contains("=> PASS"));
    let rows = json(&tmp.path().join("drift.json"))["result"]["rows"].as_array().unwrap().clone();
    assert!(rows.iter().all(|r| r["exact"].as_f64().unwrap().abs() < 1e-12));

    ok(&[
        "drift-check", "--kind", "random-regular", "--n", "80", "--d", "6", "--q0", "0.8", "--q1", "0.2", "--states", "6",
        "--replays", "1000", "--seed", "2", "--out-dir", dir_str(tmp.path()),
    ]);
}

#[test]
fn drift_check_fails_on_impossible_tolerance() {
    let out = run(&[
        "drift-check", "--kind", "complete", "--n", "30", "--q0", "0.8", "--q1", "0.2", "--states", "6", "--replays", "200",
        "--sigma", "0.000001", "--seed", "2", "--format", "json", "--out-dir", dir_str(tempfile::tempdir().unwrap().path()),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn oracle_unbiased_voter_is_linear() {
    let tmp = tempfile::tempdir().unwrap();
    ok(&["oracle", "--graph", "complete4", "--q0", "0.5", "--q1", "0.5", "--rule", "voter", "--out-dir", dir_str(tmp.path())]);
    let csv = fs::read_to_string(tmp.path().join("oracle.csv")).unwrap();
    let mut rows = 0;
    for line in csv.lines().filter(|l| !l.starts_with('#')).skip(1) {
        let mut f = line.split(',');
        let bits = f.next().unwrap();
        let p: f64 = f.next().unwrap().parse().unwrap();
        let a = bits.chars().filter(|&c| c == '1').count() as f64;
        assert!((p - a / 4.0).abs() < 1e-9, "{line}");
        rows += 1;
    }
    assert_eq!(rows, 16);
}

#[test]
fn oracle_capacity_and_compare_mc() {
    let err = fails(&["oracle", "--n", "20", "--q0", "0.8", "--q1", "0.2"]);
    assert!(err.contains("capacity"), "{err}");
    let tmp = tempfile::tempdir().unwrap();
    let stdout = ok(&[
        "oracle", "--graph", "complete5", "--q0", "0.8", "--q1", "0.2", "--rule", "two-choices", "--compare-mc",
        "--trials", "20000", "--seed", "4", "--out-dir", dir_str(tmp.path()),
    ]);
    assert_eq!(stdout.matches("z_prob=").count(), 4);
    let rows = json(&tmp.path().join("oracle.json"))["result"]["by_start_count"].as_array().unwrap().clone();
    for r in rows.iter().filter(|r| r.get("z_prob").is_some()) {
        assert!(r["z_prob"].as_f64().unwrap().abs() <= 3.0 && r["z_time"].as_f64().unwrap().abs() <= 3.0);
    }
}
