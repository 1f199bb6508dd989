//! Runs the `ergotropy` binary and checks files, exit codes and determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use coherent_ergotropy::bosonic::{adaptive_report, DisplacedThermalSpec, FockContext, N_MAX_CAP};
use coherent_ergotropy::experiments::io::read_state_file;
use coherent_ergotropy::experiments::qutrit::pipeline_delta_ec;
use coherent_ergotropy::experiments::sweeps::gad_scan;
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ergotropy"))
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn analyze_json(file: &Path, extra: &[&str]) -> Value {
    let mut args = vec!["analyze", "--state", file.to_str().unwrap()];
    args.extend_from_slice(extra);
    let out = run(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

#[test]
fn analyze_running_example() {
    let v = analyze_json(&data("running_example.json"), &[]);
    assert!((f(&v["ergotropy"]) - 0.4828).abs() < 1e-4);
    assert!((f(&v["incoherent_ergotropy"]) - 0.4).abs() < 1e-12);
    assert!((f(&v["coherent_ergotropy"]) - 0.0828).abs() < 1e-4);
    assert_eq!(v["optimal_perm"], serde_json::json!([1, 0]));
    assert!(v["bounds"]["identity_residual"].as_f64().unwrap() < 1e-12);
}

#[test]
fn analyze_pure_state_reports_infinite_beta() {
    let v = analyze_json(&data("pure_qutrit.json"), &[]);
    assert_eq!(v["beta_star"], "inf");
    assert!(v["bounds"].is_null());
    assert!((f(&v["ergotropy"]) - 1.0).abs() < 1e-12);
}

#[test]
fn analyze_gibbs_state_has_no_ergotropy() {
    let v = analyze_json(&data("gibbs_qutrit.json"), &[]);
    for key in ["ergotropy", "incoherent_ergotropy", "coherent_ergotropy", "bound_ergotropy"] {
        assert!(f(&v[key]).abs() < 1e-12, "{key} = {}", v[key]);
    }
    assert!((f(&v["beta_star"]) - 1.2).abs() < 1e-9);
}

#[test]
fn analyze_options() {
    let base = analyze_json(&data("running_example.json"), &[]);
    let scaled = analyze_json(&data("running_example.json"), &["--energy-unit", "2.5"]);
    assert!((f(&scaled["ergotropy"]) - 2.5 * f(&base["ergotropy"])).abs() < 1e-12);
    assert!((f(&scaled["beta_star"]) - f(&base["beta_star"]) / 2.5).abs() < 1e-12);

    let shifted = analyze_json(&data("running_example.json"), &["--energies", "-1,1"]);
    assert!((f(&shifted["ergotropy"]) - 2.0 * f(&base["ergotropy"])).abs() < 1e-12);

    let at_beta = analyze_json(&data("running_example.json"), &["--beta", "0.7"]);
    assert_eq!(f(&at_beta["bounds"]["beta"]), 0.7);
    assert!(f(&at_beta["bounds"]["identity_residual"]) < 1e-12);

    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "analyze",
        "--state",
        data("running_example.json").to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("coherent"));
    let written: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(written, base);
}

#[test]
fn invalid_states_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("trace.json", r#"{"dim": 2, "energies": [0, 1], "rho_re": [[0.6, 0], [0, 0.6]]}"#, "trace"),
        ("herm.json", r#"{"dim": 2, "energies": [0, 1], "rho_re": [[0.5, 0.3], [0.1, 0.5]]}"#, "Hermitian"),
        ("neg.json", r#"{"dim": 2, "energies": [0, 1], "rho_re": [[1.2, 0], [0, -0.2]]}"#, "positive semidefinite"),
        ("levels.json", r#"{"dim": 2, "energies": [1, 0], "rho_re": [[0.5, 0], [0, 0.5]]}"#, "ascending"),
        ("shape.json", r#"{"dim": 3, "energies": [0, 1, 2], "rho_re": [[1, 0], [0, 0]]}"#, "3x3"),
        ("syntax.json", "{ not json", "malformed"),
    ];
    for (name, text, needle) in cases {
        let path = write(dir.path(), name, text);
        let out = run(&["analyze", "--state", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(2), "{name}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains(needle), "{name}: {err}");
    }
    let out = run(&["analyze", "--state", data("running_example.json").to_str().unwrap(), "--energies", "0,1,2"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["qutrit-saturation", "--R", "1.5", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["analyze"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn help_documents_flags_and_defaults() {
    let out = run(&["displaced-thermal", "--help"]);
    let text = String::from_utf8_lossy(&out.stdout);
    for flag in ["--alpha-max", "--n-bar", "--n-max", "--out", "[default: 3]"] {
        assert!(text.contains(flag), "{flag} missing from help");
    }
    let out = run(&["qutrit-saturation", "--help"]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("--R"));
    let out = run(&["property-suite", "--help"]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("--seed"));
}

fn sweep_twice(args: &[&str], file: &str) -> (PathBuf, tempfile::TempDir, tempfile::TempDir) {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let mut full: Vec<&str> = args.to_vec();
        full.extend(["--out", dir.path().to_str().unwrap()]);
        let out = run(&full);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let first = std::fs::read(a.path().join(file)).unwrap();
    let second = std::fs::read(b.path().join(file)).unwrap();
    assert_eq!(first, second, "{file} differs between runs");
    (a.path().join(file), a, b)
}

#[test]
fn displaced_thermal_csv_is_deterministic_and_rederivable() {
    let (csv, _a, _b) = sweep_twice(
        &["displaced-thermal", "--alpha-max", "2", "--alpha-points", "5", "--n-bar", "0,0.5"],
        "displaced_thermal.csv",
    );
    let (header, rows) = csv_rows(&csv);
    assert_eq!(header, ["alpha", "n_bar", "n_max", "energy", "ergotropy", "ec", "ei", "ec_over_e"]);
    assert_eq!(rows.len(), 10);
    let ctx = FockContext::new(60, 1.0).unwrap();
    for row in &rows {
        let num = |k: usize| row[k].parse::<f64>().unwrap();
        let (alpha, n_bar) = (num(0), num(1));
        let (r, _) = adaptive_report(&ctx, &DisplacedThermalSpec::real(alpha, n_bar).unwrap(), N_MAX_CAP).unwrap();
        assert_eq!(row[2].parse::<usize>().unwrap(), r.n_max);
        assert!((num(3) - r.energy).abs() < 1e-9);
        assert!((num(4) - r.report.ergotropy).abs() < 1e-9);
        assert!((num(5) - r.report.coherent).abs() < 1e-9);
        assert!((num(6) - r.report.incoherent).abs() < 1e-9);
        if alpha == 0.0 {
            assert_eq!(row[7], "");
        } else {
            assert!((num(7) - r.coherent_fraction().unwrap()).abs() < 1e-9);
        }
    }
    let dir = csv.parent().unwrap();
    assert!(std::fs::read_to_string(dir.join("displaced_thermal.svg")).unwrap().contains("<polyline"));
    assert!(dir.join("displaced_thermal_fraction.svg").exists());
}

#[test]
fn qutrit_csv_is_deterministic_and_rederivable() {
    let (csv, _a, _b) = sweep_twice(&["qutrit-saturation", "--R", "0,0.5,1", "--grid", "25"], "qutrit_saturation.csv");
    let (header, rows) = csv_rows(&csv);
    assert_eq!(header, ["R", "r1", "r2", "r3", "beta_star", "delta_ec"]);
    assert_eq!(rows.len(), 75);
    for row in &rows {
        let num = |k: usize| row[k].parse::<f64>().unwrap();
        let d = pipeline_delta_ec(num(1), num(2), num(0)).unwrap();
        assert!((d - num(5)).abs() < 1e-9);
        assert!(d.abs() < 1e-8);
    }
    let log = std::fs::read_to_string(csv.with_file_name("qutrit_saturation_anomalies.log")).unwrap();
    assert!(log.is_empty(), "{log}");
}

#[test]
fn gad_csv_is_deterministic_and_rederivable() {
    let (csv, _a, _b) = sweep_twice(&["gad-counterexample", "--q-points", "21"], "gad_counterexample.csv");
    let (header, rows) = csv_rows(&csv);
    assert_eq!(header, ["q", "ec_in", "ec_out", "diff", "purity_out", "p_c"]);
    let scan = gad_scan(0.1, 1.0 / 3.0, 21).unwrap();
    assert_eq!(rows.len(), scan.rows.len());
    for (row, r) in rows.iter().zip(&scan.rows) {
        let num = |k: usize| row[k].parse::<f64>().unwrap();
        assert!((num(0) - r.q).abs() < 1e-12);
        assert!((num(3) - r.diff).abs() < 1e-9);
        assert!((num(4) - r.purity_out).abs() < 1e-9);
    }
    let out = run(&["gad-counterexample", "--q-points", "11", "--out", csv.parent().unwrap().to_str().unwrap()]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("min difference -"));
}

#[test]
fn property_suite_passes_and_reports_injected_failures() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = run(&["property-suite", "--count", "20", "--out", d]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let lines = std::fs::read_to_string(dir.path().join("property_suite.jsonl")).unwrap();
    assert!(lines.lines().count() >= 10);
    for line in lines.lines() {
        let v: Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["passed"], true, "{line}");
    }

    let out = run(&["property-suite", "--count", "5", "--inject-bad-tolerance", "--out", d]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL decomposition_identity"));
    let dump = dir.path().join("counterexample_decomposition_identity.json");
    let state = read_state_file(&dump).unwrap();
    assert!(state.into_problem(None).is_ok());
}
