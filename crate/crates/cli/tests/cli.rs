use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gaudin-rsk"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

#[test]
fn rsk_worked_example() {
    let out = run(&["rsk", "--matrix", "[[0,2,1],[1,0,1]]"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["P"], serde_json::json!([[1, 2, 3, 3], [2]]));
    assert_eq!(v["Q"], serde_json::json!([[1, 1, 1, 2], [2]]));
    assert_eq!(v["seed"], 0);
}

#[test]
fn rsk_inverse_roundtrip() {
    let out = run(&["rsk", "--inverse", "--p", "[[1,2,3,3],[2]]", "--q", "[[1,1,1,2],[2]]", "--cols", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["matrix"], serde_json::json!([[0, 2, 1], [1, 0, 1]]));
}

#[test]
fn rsk_check_suite() {
    let out = run(&["rsk", "--check", "--max-dim", "4", "--max-entry", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["status"], "ok");
    assert!(v["summary"].as_str().unwrap().starts_with("ok, "));
}

#[test]
fn malformed_input_is_a_usage_error() {
    let out = run(&["rsk", "--matrix", "[[0,2,1],[1,0"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("column"));
    assert_eq!(run(&["rsk", "--matrix", "[[1,2],[3]]"]).status.code(), Some(3));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(3));
    assert_eq!(run(&["cells", "--kind", "diagonal"]).status.code(), Some(3));
}

#[test]
fn crystal_edges() {
    let out = run(&["crystal", "--rows", "2", "--col-sums", "1,1", "--check"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["elements"].as_array().unwrap().len(), 4);
    let edges = v["edges"].as_array().unwrap();
    assert_eq!(edges.len(), 2);
    assert!(edges.iter().all(|e| e["i"] == 1));
    assert_eq!(v["rsk_isomorphism"]["passed"], true);
}

#[test]
fn flow_defaults_pass() {
    let out = run(&["flow"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["rsk_agreement"], true);
    assert_eq!(v["branches"].as_array().unwrap().len(), 81);
}

#[test]
fn flow_budget_is_enforced() {
    let out = run(&["flow", "--r", "3", "--n", "3", "--bound", "2", "--max-dim", "10"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("budget"));
}

#[test]
fn flow_writes_traces_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let report = dir.path().join("report.json");
    let out = run(&[
        "flow",
        "--r",
        "2",
        "--n",
        "3",
        "--k",
        "1,1,1",
        "--q=-0.5,1.2",
        "--trace",
        trace.to_str().unwrap(),
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let csv = fs::read_to_string(&trace).unwrap();
    assert!(csv.starts_with("block,leg,param,branch,operator,value\n"));
    assert!(csv.lines().count() > 100);
    let v: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["params"]["q"], serde_json::json!([-0.5, 1.2]));
    assert_eq!(v["branches"].as_array().unwrap().len(), 8);
}

#[test]
fn cells_examples() {
    let out = run(&["cells", "--n", "3", "--kind", "right"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["blocks"].as_array().unwrap().len(), 4);
    assert_eq!(v["matches_kl"], true);

    let out = run(&["cells", "--n", "4", "--kind", "two-sided"]);
    assert_eq!(out.status.code(), Some(0));
    let mut sizes: Vec<u64> = json(&out)["blocks"].as_array().unwrap().iter().map(|b| b.as_array().unwrap().len() as u64).collect();
    sizes.sort();
    assert_eq!(sizes, vec![1, 1, 4, 9, 9]);

    let out = run(&["cells", "--n", "2", "--kind", "left"]);
    assert_eq!(json(&out)["blocks"], serde_json::json!([[[1, 2]], [[2, 1]]]));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# cells campaign\nn = 4\nkind = left\nseed = 5\n").unwrap();
    let out = run(&["cells", "--config", cfg.to_str().unwrap(), "--n", "3"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["n"], 3);
    assert_eq!(v["kind"], "left");
    assert_eq!(v["seed"], 5);

    fs::write(&cfg, "bogus = 1\n").unwrap();
    assert_eq!(run(&["cells", "--config", cfg.to_str().unwrap()]).status.code(), Some(3));
}

#[test]
fn identical_config_and_seed_give_identical_reports() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for (path, name) in [(&a, "x.json"), (&b, "x.json")] {
        let target = dir.path().join(name);
        let out = run(&["flow", "--r", "2", "--n", "3", "--k", "2,1,1", "--seed", "9", "--out", target.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
        fs::rename(&target, path).unwrap();
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let cells = |_: ()| run(&["cells", "--n", "4", "--kind", "two-sided", "--seed", "3"]).stdout;
    assert_eq!(cells(()), cells(()));
}
