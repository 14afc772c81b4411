use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn run(config: &Path, out: &Path, extra: &[&str]) -> (i32, Value) {
    let status = Command::new(env!("CARGO_BIN_EXE_cornerflow"))
        .arg("run")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .unwrap();
    let summary = std::fs::read_to_string(out.join("summary.json")).unwrap();
    (status.status.code().unwrap(), serde_json::from_str(&summary).unwrap())
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

#[test]
fn every_bundled_scenario_validates() {
    let dir = scenario("");
    let mut files: Vec<_> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    files.sort();
    assert!(files.len() >= 5);
    let out = Command::new(env!("CARGO_BIN_EXE_cornerflow")).arg("validate").args(&files).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn circle_summary_matches_exact_formula() {
    let dir = tempfile::tempdir().unwrap();
    let (code, s) = run(&scenario("circle.json"), dir.path(), &[]);
    assert_eq!(code, 0);
    let gamma = 4.0;
    assert!((f(&s["far_field"]["gamma_estimate"]) - gamma).abs() < 1e-9);
    assert!((f(&s["far_field"]["c2"][0]) + 1.0).abs() < 1e-9);
    assert!((f(&s["forces"]["lift"]) + gamma).abs() < 1e-9);
    for row in s["integrals"].as_array().unwrap() {
        assert!((f(&row["circulation"]) - gamma).abs() < 1e-6);
        assert!(f(&row["mass_flux"]).abs() < 1e-6);
    }
    let csv = std::fs::read_to_string(dir.path().join("field.csv")).unwrap();
    assert_eq!(csv.lines().count(), 40001);
}

#[test]
fn plate_summary_has_kutta_root_and_corner_reports() {
    let dir = tempfile::tempdir().unwrap();
    let (code, s) = run(&scenario("plate30.json"), dir.path(), &[]);
    assert_eq!(code, 0);
    let exact = f(&s["kutta"]["conformal_circulation"]);
    assert!((f(&s["kutta"]["circulation"]) - exact).abs() < 0.01 * exact.abs());
    let corners = s["corners"].as_array().unwrap();
    assert_eq!(corners[1]["singular"], Value::Bool(false));
    assert_eq!(corners[1]["sign_attainment"], "both");
    assert!((f(&corners[0]["fitted_exponent"]) + 0.5).abs() < 0.05);
}

#[test]
fn triangle_census_finds_no_common_circulation() {
    let dir = tempfile::tempdir().unwrap();
    let (code, s) = run(&scenario("triangle_census.json"), dir.path(), &[]);
    assert_eq!(code, 0);
    assert_eq!(s["census"]["verdict_text"], "no circulation regularizes all corners");
    assert!(s["census"]["min_singular_count"].as_u64().unwrap() >= 1);
}

#[test]
fn summaries_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run(&scenario("square_census.json"), a.path(), &[]);
    run(&scenario("square_census.json"), b.path(), &[]);
    let read = |d: &Path| std::fs::read(d.join("summary.json")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
}

#[test]
fn compressible_mach_column_matches_summary() {
    let dir = tempfile::tempdir().unwrap();
    let (code, s) = run(&scenario("circle_compressible.json"), dir.path(), &[]);
    assert_eq!(code, 0);
    let csv = std::fs::read_to_string(dir.path().join("field.csv")).unwrap();
    let max = csv
        .lines()
        .skip(1)
        .filter_map(|l| l.rsplit(',').next().unwrap().parse::<f64>().ok())
        .filter(|m| m.is_finite())
        .fold(0.0, f64::max);
    assert_eq!(max, f(&s["compressible"]["max_mach"]));
}

#[test]
fn plate_refinement_reaches_the_sonic_guard() {
    let dir = tempfile::tempdir().unwrap();
    let (code, s) = run(&scenario("plate30_compressible.json"), dir.path(), &[]);
    assert_eq!(code, 0);
    let study = &s["refinement_study"];
    assert_eq!(study["finest_aborted"], Value::Bool(true));
    assert_eq!(study["flux_ratio_increasing"], Value::Bool(true));
    assert_eq!(study["label"], "finite-resolution signature");
}

#[test]
fn schema_violation_exits_two_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        "{\n  \"schema_version\": 1,\n  \"name\": \"x\",\n  \"body\": {\"kind\": \"circle\", \"radius\": 1.0},\n  \"flow\": {}\n}\n",
    )
    .unwrap();
    let (code, s) = run(&bad, &dir.path().join("out"), &[]);
    assert_eq!(code, 2);
    assert_eq!(s["status"], "config_error");
    assert_eq!(s["error"]["line"], 5);
}

#[test]
fn solver_error_exits_one_with_structured_error() {
    let dir = tempfile::tempdir().unwrap();
    let (code, s) = run(&scenario("circle.json"), dir.path(), &["--override", "solver.method=\"panel\""]);
    assert_eq!(code, 1);
    assert_eq!(s["status"], "solver_error");
    assert_eq!(s["error"]["kind"], "unsupported");
}

#[test]
fn override_changes_tolerances() {
    let dir = tempfile::tempdir().unwrap();
    let (code, s) = run(
        &scenario("circle_panel.json"),
        dir.path(),
        &["--override", "tolerances.farfield_radii=[6.0, 9.0]"],
    );
    assert_eq!(code, 0);
    assert_eq!(s["scenario"]["tolerances"]["farfield_radii"][1], 9.0);
}
