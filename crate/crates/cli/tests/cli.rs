use std::path::PathBuf;
use std::process::{Command, Output};

use ncresidue_core::config::{Overrides, ResolvedSettings};
use ncresidue_core::report::Report;

fn spec(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("specs").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ncresidue")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn log_kernel_residues_are_minus_one() {
    let path = spec("log_kernel.toml");
    let out = run(&["residue", "--spec", path.to_str().unwrap(), "--format", "json"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    let p = &v["points"][0];
    let w = p["wodzicki"]["value"][0].as_f64().unwrap();
    let g = p["groupoidal"]["value"][0].as_f64().unwrap();
    assert!((w + 1.0).abs() < 1e-12 && (g + 1.0).abs() < 1e-12, "{w} {g}");
}

#[test]
fn text_format_comes_from_the_spec() {
    let path = spec("log_kernel.toml");
    let out = run(&["residue", "--spec", path.to_str().unwrap()]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("wodzicki") && text.contains("PASSED"), "{text}");
}

#[test]
fn heisenberg_ponge_and_groupoidal_agree() {
    let path = spec("heisenberg.toml");
    let out = run(&["residue", "--spec", path.to_str().unwrap(), "--format", "json"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    for p in v["points"].as_array().unwrap() {
        assert_eq!(p["equivalence"]["agree"], true);
        assert_eq!(p["equivalence"]["certified"], true);
    }
}

#[test]
fn unknown_term_is_a_spec_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "grading = \"trivial(2)\"\noperator = \"fourier_magic\"\n").unwrap();
    let out = run(&["residue", "--spec", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("fourier_magic"));
}

#[test]
fn malformed_spec_reports_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("typo.toml");
    std::fs::write(&path, "grading = \"trivial(2)\"\noperator = \"gaussian\"\npoints = [[0.0, 0.0]\n").unwrap();
    let out = run(&["residue", "--spec", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("typo.toml") && err.contains("line"), "{err}");
    assert_eq!(run(&["residue", "--spec", "/nonexistent.toml"]).status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("small.toml");
    std::fs::write(
        &path,
        "grading = \"trivial(2)\"\noperator = \"log_kernel(p0=1)\"\n[quadrature]\nsphere_degree = 8\n[global]\nregion = [[-1.0, 1.0], [-1.0, 1.0]]\ngrid = 5\n",
    )
    .unwrap();
    let out = run(&["residue", "--spec", path.to_str().unwrap(), "--format", "text"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("support overflow"));
}

#[test]
fn report_round_trip_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = spec("bump_density.toml");
    let out_json = dir.path().join("r.json");
    let out = run(&["residue", "--spec", path.to_str().unwrap(), "--out", out_json.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = Report::from_json(&std::fs::read_to_string(&out_json).unwrap()).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let resolved = ResolvedSettings::from_toml(&text, "again", &Overrides::default()).unwrap();
    assert_eq!(report.settings.as_ref(), Some(&resolved));
    let global = report.global.unwrap().value.unwrap();
    assert!((global.re + 1.0).abs() < 1e-6, "{global}");

    let out = run(&["residue", "--spec", path.to_str().unwrap(), "--format", "csv", "--seed", "9"]);
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.starts_with("point,x,method,re,im,error"));
    assert_eq!(csv.lines().filter(|l| l.contains(",wodzicki,")).count(), 3);
    assert!(csv.contains("global_residue"));
}

#[test]
fn s_set_override_is_echoed() {
    let path = spec("log_kernel.toml");
    let out = run(&["residue", "--spec", path.to_str().unwrap(), "--format", "json", "--s-set", "0.5,2"]);
    let v = json(&out);
    assert_eq!(v["settings"]["s_set"], serde_json::json!([0.5, 2.0]));
    assert_eq!(v["points"][0]["groupoidal"]["samples"].as_array().unwrap().len(), 2);
}

#[test]
fn verify_conv_passes() {
    let out = run(&["verify", "conv", "--threads", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let out = run(&["conv-check", "--format", "json"]);
    let v = json(&out);
    assert_eq!(v["passed"], true);
    assert!(v["checks"].as_array().unwrap().len() >= 4);
}

#[test]
fn verify_all_with_loose_tolerance() {
    let out = run(&["verify", "all", "--tol", "1e-2", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    let checks = v["checks"].as_array().unwrap();
    let loose = checks.iter().filter(|c| c["tolerance"].as_f64() == Some(1e-2)).count();
    assert!(loose > 50, "{loose}");
}

#[test]
fn unknown_suite_is_rejected() {
    assert_eq!(run(&["verify", "magic"]).status.code(), Some(2));
}
