//! End-to-end runs of the `manifold-dp` binary.

use std::path::Path;
use std::process::{Command, Output};

use manifold_dp::harness::output::{read_aggregates, read_trials};
use manifold_dp::mechanisms::Mechanism;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_manifold-dp")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn release_prints_a_record() {
    let o = run(&["release", "--manifold", "sphere:2", "--n", "10", "--eps", "0.5", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["mechanism"], "bm");
    assert_eq!(v["private_point"].as_array().unwrap().len(), 3);
    assert!((v["t_used"].as_f64().unwrap() - 0.1960045283411311).abs() < 1e-12);

    // same seed, same output
    let again = run(&["release", "--manifold", "sphere:2", "--n", "10", "--eps", "0.5", "--seed", "7"]);
    assert_eq!(stdout(&o), stdout(&again));
}

#[test]
fn release_reads_points_from_csv() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("pts.csv");
    std::fs::write(&data, "# x,y,z\n0,0,1\n0.1,0,0.995\n0,0.2,0.98\n").unwrap();
    let o = run(&[
        "release", "--manifold", "hyperboloid:2", "--mechanism", "langevin", "--data",
        dir.path().join("missing.csv").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["release", "--manifold", "sphere:2", "--data", data.to_str().unwrap(), "--eps", "0.5"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn bad_input_exits_2() {
    assert_eq!(run(&["calibrate", "--manifold", "torus:2", "--eps", "1", "--delta", "0.1"]).status.code(), Some(2));
    assert_eq!(run(&["calibrate", "--eps", "-1", "--delta", "0.1"]).status.code(), Some(2));
    // BM on H² cannot go below the floor KαΔ²/2 = 1
    let o = run(&["calibrate", "--manifold", "hyperboloid:2", "--eps", "0.5", "--delta", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(run(&["validate", "--suite", "nonsense"]).status.code(), Some(2));
}

#[test]
fn calibrate_and_sensitivity_tables() {
    let o = run(&["calibrate", "--eps", "0.5,1", "--delta", "0.49"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "mechanism,epsilon,parameter,value,check");
    assert_eq!(lines.len(), 3);
    let cols: Vec<&str> = lines[1].split(',').collect();
    assert!((cols[3].parse::<f64>().unwrap() - 0.19608860689061448).abs() < 1e-13);

    let o = run(&["sensitivity", "--manifold", "hyperboloid:2", "--r", "3", "--n", "10,100"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[1], "hadamard");
    assert!((row[2].parse::<f64>().unwrap() - 0.6).abs() < 1e-14);
}

#[test]
fn validate_exit_code_reflects_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let o = run(&["validate", "--suite", "calibration,geometry", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 2);
    assert!(v.as_array().unwrap().iter().all(|r| r["passed"] == true));
}

fn tables(dir: &Path) -> (Vec<manifold_dp::harness::TrialRow>, Vec<manifold_dp::harness::AggregateRow>) {
    (read_trials(&dir.join("trials.csv")).unwrap(), read_aggregates(&dir.join("aggregates.csv")).unwrap())
}

#[test]
fn experiment_writes_tables_and_honours_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.conf");
    std::fs::write(
        &cfg,
        "# small grid\nmanifold = hyperboloid:2\neps = 0.1, 3\nn = 10\ntrials = 5\nmechanisms = langevin,rl\nanchor = random\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = run(&["--threads", "2", "experiment", "--config", cfg.to_str().unwrap(), "--trials", "4", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let (rows, aggs) = tables(&out);
    assert_eq!(aggs.len(), 4);
    assert!(aggs.iter().all(|a| a.manifold == "hyperboloid2" && a.scenario.label() == "random"));
    // RL at ε = 0.1 on H² has no normalizable Laplace law: one error row
    let rl_err: Vec<_> = rows.iter().filter(|r| r.mechanism == Mechanism::Rl && r.error.is_some()).collect();
    assert_eq!(rl_err.len(), 1);
    assert_eq!(rl_err[0].error.as_deref(), Some("normalization"));
    assert_eq!(rows.iter().filter(|r| r.error.is_none()).count(), 3 * 4);
    assert!(out.join("cells.csv").exists());
    assert!(out.join("panel_hyperboloid2_random_n10.csv").exists());

    // sequential rerun is byte-identical
    let out1 = dir.path().join("seq");
    let o = run(&["--threads", "1", "experiment", "--config", cfg.to_str().unwrap(), "--trials", "4", "--out", out1.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    for f in ["trials.csv", "aggregates.csv", "cells.csv"] {
        assert_eq!(std::fs::read(out.join(f)).unwrap(), std::fs::read(out1.join(f)).unwrap(), "{f}");
    }
}
