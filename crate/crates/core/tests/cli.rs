// Copyright 2026 qhconvex contributors
// SPDX-License-Identifier: Apache-2.0

use std::path::Path;
use std::process::{Command, Output};

use qhconvex::unitary::haar_su;
use qhconvex::{rng, UnitaryMatrix};
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qhconvex")).args(args).output().expect("binary runs")
}

fn json_out(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn write_spec(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_owned()
}

const SU2: &str = r#"{"n": 2, "classes": [[0.2, -0.2], [0.15, -0.15]], "seed": 7, "samples": 2000}"#;

#[test]
fn classify_prints_signature() {
    let o = run(&["classify", "--x", "0.5,0,-0.5"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json_out(&o), serde_json::json!({"Z0": [], "Z1": [[1, 3]]}));

    let o = run(&["classify", "--x", "0,0,0", "--verbose"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json_out(&o)["stabilizer_dim"], 8);
}

#[test]
fn invalid_inputs_exit_2() {
    let o = run(&["classify", "--x", "0.3,0.1"]);
    assert_eq!(o.status.code(), Some(2));
    let v = json_out(&o);
    assert!(v["error"].is_string() && v["message"].is_string());

    let dir = tempfile::tempdir().unwrap();
    let bad = write_spec(dir.path(), "bad.json", r#"{"n": 3, "classes": [[0.2, -0.2]], "seed": 1}"#);
    assert_eq!(run(&["sample", "--spec", &bad]).status.code(), Some(2));
    let missing = dir.path().join("missing.json");
    assert_eq!(run(&["sample", "--spec", missing.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn sample_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "su2.json", SU2);
    let csv = dir.path().join("cloud.csv");
    let o = run(&["sample", "--spec", &spec, "--samples", "100000", "--out", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let summary = json_out(&o);
    assert_eq!(summary["points"], 100000);
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x1,x2,cell_Z0,cell_Z1"));
    let rows: Vec<f64> = lines.map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(rows.len(), 100000);
    let lo = rows.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = rows.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    assert!((lo - 0.05).abs() < 0.01 && (hi - 0.35).abs() < 0.01);
}

#[test]
fn outputs_independent_of_jobs() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "su2.json", SU2);
    for cmd in [
        vec!["sample", "--spec", &spec],
        vec!["verify-convexity", "--spec", &spec, "--pairs", "20"],
        vec!["solve", "--spec", &spec, "--x", "0.2,-0.2"],
    ] {
        let one = run(&[&["--jobs", "1"], cmd.as_slice()].concat());
        let four = run(&[&["--jobs", "4"], cmd.as_slice()].concat());
        assert_eq!(one.status.code(), Some(0), "{cmd:?}");
        assert_eq!(one.stdout, four.stdout, "{cmd:?}");
    }
}

#[test]
fn infeasible_solve_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "su2.json", SU2);
    let o = run(&["solve", "--spec", &spec, "--x", "0.5,-0.5"]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(json_out(&o)["report"]["status"], "NonConvergent");
}

#[test]
fn transfer_to_unitary_reports_residuals() {
    let dir = tempfile::tempdir().unwrap();
    let mut r = rng::from_seed(4);
    let a: Vec<UnitaryMatrix> = (0..3).map(|_| haar_su(3, &mut r)).collect();
    let input = dir.path().join("a.json");
    std::fs::write(&input, serde_json::to_string(&a).unwrap()).unwrap();
    let o = run(&["transfer", "--direction", "to-unitary", "--in", input.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v = json_out(&o);
    assert!(v["identity_residual"].as_f64().unwrap() < 1e-10);
    assert!(v["spectrum_residual"].as_f64().unwrap() < 1e-10);
    let u: Vec<UnitaryMatrix> = serde_json::from_value(v["u"].clone()).unwrap();
    assert_eq!(u.len(), 3);
}
