use std::process::{Command, Output};

use ctxwb::relax::MomentProblem;

fn ctxwb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ctxwb")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn leading_value(o: &Output) -> f64 {
    stdout(o).split_whitespace().next().unwrap().parse().unwrap()
}

#[test]
fn bound_q1_and_nc() {
    let q = ctxwb(&["bound", "--scenario", "632", "--metric", "table1:2", "--set", "q1"]);
    assert_eq!(q.status.code(), Some(0));
    assert!((leading_value(&q) - 2.8660254).abs() < 1e-5);
    let nc = ctxwb(&["bound", "--scenario", "632", "--metric", "table1:2", "--set", "nc"]);
    assert_eq!(nc.status.code(), Some(0));
    assert!((leading_value(&nc) - 2.5).abs() < 1e-7);
}

#[test]
fn projective_bound_on_mporac23_is_a_third() {
    let o = ctxwb(&["bound", "--scenario", "mporac23", "--metric", "mporac23", "--set", "qpi"]);
    match o.status.code() {
        Some(2) => assert!(stdout(&o).contains("infeasible")),
        Some(0) => assert!(leading_value(&o) <= 1.0 / 3.0 + 1e-6),
        other => panic!("exit {other:?}"),
    }
}

#[test]
fn anchor_mismatch_exits_3() {
    let o = ctxwb(&["bound", "--scenario", "632", "--metric", "table1:2", "--set", "q1", "--expect", "3"]);
    assert_eq!(o.status.code(), Some(3));
    let o = ctxwb(&["bound", "--scenario", "632", "--metric", "table1:2", "--set", "q1", "--expect", "2.8660254"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn usage_errors_exit_nonzero() {
    let o = ctxwb(&["bound", "--scenario", "missing.json", "--metric", "table1:1", "--set", "c"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing.json"));
    assert_eq!(ctxwb(&["preset", "table9"]).status.code(), Some(1));
    assert_eq!(ctxwb(&["bound", "--scenario", "632", "--metric", "porac:3", "--set", "c"]).status.code(), Some(1));
    assert_ne!(ctxwb(&["bound", "--set", "q1"]).status.code(), Some(0));
}

#[test]
fn bound_writes_reports_and_exports() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("b.json");
    let csv = dir.path().join("b.csv");
    let export = dir.path().join("problem.json");
    let o = ctxwb(&[
        "bound", "--scenario", "632", "--metric", "table1:1", "--set", "q1",
        "--out", json.to_str().unwrap(), "--export", export.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(report["status"], "optimal");
    assert!(MomentProblem::from_json(&std::fs::read_to_string(&export).unwrap()).is_ok());
    let o = ctxwb(&["bound", "--scenario", "porac:2", "--metric", "porac:2", "--set", "c", "--out", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let b = ctxwb::scenario::load_behaviour(&csv).unwrap();
    assert_eq!(b.p.len(), 16);
}

#[test]
fn seesaw_reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    let real = dir.path().join("r.json");
    for out in [&a, &b] {
        let o = ctxwb(&[
            "seesaw", "--scenario", "porac:2", "--metric", "porac:2", "--dim", "2", "--restarts", "4", "--seed", "7",
            "--out", out.to_str().unwrap(), "--dump-realization", real.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
        assert!(stdout(&o).contains("value=0.85355"));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert!(ctxwb::seesaw::QuantumRealization::from_json(&std::fs::read_to_string(&real).unwrap()).is_ok());
}

#[test]
fn seesaw_on_632_and_dimension_sweep() {
    let o = ctxwb(&["seesaw", "--scenario", "632", "--metric", "table1:1", "--dim", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let v: f64 = stdout(&o).split("value=").nth(1).unwrap().split_whitespace().next().unwrap().parse().unwrap();
    assert!((v - 3.0).abs() < 1e-5);
    let o = ctxwb(&["seesaw", "--scenario", "porac:2", "--metric", "porac:2", "--dim", "2", "--max-dim", "3", "--restarts", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 2);
}

#[test]
fn presets_write_files_and_report_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let o = ctxwb(&["preset", "prop7", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("S_QPsi1"));
    let csv = std::fs::read_to_string(dir.path().join("prop7.csv")).unwrap();
    assert!(csv.starts_with("preset,row,column,value,status,check,anchor,tol,verdict,seconds,note"));
    assert!(dir.path().join("prop7.json").exists());
    // the S_Q1 <= 0.5258 cell fails for every sound relaxation
    assert_eq!(ctxwb(&["preset", "prop6"]).status.code(), Some(3));
}
