use std::process::{Command, Output};

use serde_json::Value;

fn cordspec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cordspec")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

#[test]
fn spectrum_csv_has_golden_rows() {
    let out = cordspec(&["spectrum", "--height", "2", "--cutoff", "4", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("class_word,length"));
    assert_eq!(lines.count(), 216);
}

#[test]
fn spectrum_to_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    let args = ["spectrum", "--height", "2", "--cutoff", "3"];
    let out = cordspec(&[&args[..], &["--output", path.to_str().unwrap()]].concat());
    assert!(out.status.success());
    let stdout = json(&cordspec(&args));
    let file: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(stdout, file);
    assert_eq!(file["entries"].as_array().unwrap().len(), 24);
}

#[test]
fn auto_height_is_embedded() {
    let v = json(&cordspec(&["spectrum", "--height", "auto", "--cutoff", "3"]));
    let h = v["header"]["horoball_height"].as_f64().unwrap();
    assert!((h - 1.0).abs() < 1e-9, "{h}");
}

#[test]
fn bad_inputs_exit_two() {
    let missing = cordspec(&["spectrum", "--input", "/nonexistent/holonomy.json"]);
    assert_eq!(missing.status.code(), Some(2));
    let low = cordspec(&["spectrum", "--height", "0.5"]);
    assert_eq!(low.status.code(), Some(2));
    let mesh = cordspec(&["index", "--mesh", "100"]);
    assert_eq!(mesh.status.code(), Some(2));
    let knot = cordspec(&["torus", "--p", "2", "--q", "4"]);
    assert_eq!(knot.status.code(), Some(2));
}

#[test]
fn verify_passes_by_default() {
    let out = cordspec(&["verify"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["pass"], Value::Bool(true));
    assert_eq!(v["suites"].as_array().unwrap().len(), 4);
}

#[test]
fn verify_fails_on_impossible_tolerance() {
    let out = cordspec(&["verify", "--suite", "curvature", "--tol", "1e-20"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn verify_runs_one_suite() {
    let v = json(&cordspec(&["verify", "--suite", "forms"]));
    let suites = v["suites"].as_array().unwrap();
    assert_eq!(suites.len(), 1);
    assert_eq!(suites[0]["suite"], "forms");
}

#[test]
fn index_is_zero_on_short_cords() {
    let v = json(&cordspec(&["index", "--height", "2", "--cutoff", "3", "--mesh", "64", "--constant-chord"]));
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 24);
    for r in rows {
        assert_eq!((r["index"].as_u64(), r["nullity"].as_u64()), (Some(0), Some(0)));
    }
}

#[test]
fn torus_reports_ranks() {
    let v = json(&cordspec(&["torus", "--p", "2", "--q", "3", "--max-length", "8"]));
    assert_eq!(v["euler_characteristic"], 1);
    assert_eq!(v["rank_table"]["counts"]["0"], 460);
    assert_eq!(v["rank_table"]["counts"]["1"], 460);
}

#[test]
fn torus_writes_families() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.csv");
    let out = cordspec(&["torus", "--p", "3", "--q", "2", "--ambient", "s2xs1", "--max-length", "4", "--families"]
        .iter()
        .copied()
        .chain([path.to_str().unwrap()])
        .collect::<Vec<_>>());
    let v = json(&out);
    let n = v["rank_table"]["counts"]["0"].as_u64().unwrap() as usize;
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), n + 1);
}

#[test]
fn triangle_obeys_gauss_bonnet() {
    let v = json(&cordspec(&["triangle", "AbaB", "AbaB", "abABaaBA"]));
    let rows = v["triangles"].as_array().unwrap();
    assert!(!rows.is_empty());
    for r in rows {
        assert!(r["gauss_bonnet_residual"].as_f64().unwrap().abs() < 1e-9);
        assert!(r["plane_defect"].as_f64().unwrap() < 1e-9);
    }
}

#[test]
fn unknown_class_is_rejected() {
    let out = cordspec(&["triangle", "zzz", "AbaB", "abABaaBA"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn output_ignores_thread_count() {
    let args = ["spectrum", "--height", "2", "--cutoff", "4"];
    let one = cordspec(&[&["--threads", "1"], &args[..]].concat());
    let two = cordspec(&[&["--threads", "3"], &args[..]].concat());
    assert!(one.status.success() && two.status.success());
    assert_eq!(one.stdout, two.stdout);
}
