use std::path::Path;
use std::process::{Command, Output};

use ensemble_instability::trees::{build_table1_fixture, table1_report};
use serde_json::{json, Value};

const BIN: &str = env!("CARGO_BIN_EXE_ensemble-instability");

fn run(dir: &Path, args: &[&str]) -> (i32, String, String) {
    let Output { status, stdout, stderr } = Command::new(BIN).args(args).current_dir(dir).output().unwrap();
    (status.code().unwrap(), String::from_utf8(stdout).unwrap(), String::from_utf8(stderr).unwrap())
}

fn read_json(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join(name)).unwrap()).unwrap()
}

fn write(dir: &Path, name: &str, value: &Value) {
    std::fs::write(dir.join(name), serde_json::to_string(value).unwrap()).unwrap();
}

#[test]
fn audit_of_the_table1_pair_finds_the_reversal() {
    let dir = tempfile::tempdir().unwrap();
    let r = table1_report(&build_table1_fixture()).unwrap();
    write(dir.path(), "pair.json", &json!({"profiles": [r.profiles[0].to_json(), r.profiles[1].to_json()]}));
    let (code, out, _) = run(dir.path(), &["audit", "--agg", "soft_voting", "pair.json", "--out", "report.json"]);
    assert_eq!(code, 2, "{out}");
    assert!(out.contains("mcr            1 witness(es)"), "{out}");
    assert!(out.contains("from {1} to {2}"), "{out}");
    let report = read_json(dir.path(), "report.json");
    assert_eq!(report["exit_code"], 2);
    let mcr = report["results"].as_array().unwrap().iter().find(|r| r["axiom"] == "mcr").unwrap();
    assert_eq!(mcr["witnesses"][0]["labels"], json!(["1", "2"]));
    // the report itself audits back to the same witnesses
    let (code, out, _) = run(dir.path(), &["audit", "report.json"]);
    assert_eq!(code, 2, "{out}");
}

#[test]
fn audit_of_a_dictator_on_the_canonical_family() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, _) = run(dir.path(), &["audit", "--agg", "dictator:1", "--family", "canonical", "--Y", "3", "--m", "3"]);
    assert_eq!(code, 2);
    assert!(out.contains("nondegeneracy  1 witness(es)"), "{out}");
    for axiom in ["unanimity", "mcr", "transitivity", "idc"] {
        assert!(out.contains(&format!("{axiom:<14} holds")), "{out}");
    }
}

#[test]
fn audit_of_a_unanimous_profile_is_clean() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "z.json", &json!({"labels": ["a", "b", "c"], "scores": [[3, 2, 1], [5, "1/2", 0]]}));
    let (code, out, _) = run(dir.path(), &["audit", "--agg", "soft_voting", "z.json"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("nondegeneracy  not applicable"), "{out}");
}

#[test]
fn search_writes_replayable_witnesses() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["search", "--agg", "hard_voting", "--family", "canonical", "--Y", "3", "--m", "3", "--axiom", "mcr", "--out", "w.json"];
    let (code, out, _) = run(dir.path(), &args);
    assert_eq!(code, 2, "{out}");
    let w = read_json(dir.path(), "w.json");
    assert_eq!(w.as_array().unwrap().len(), 1);
    assert_eq!(w[0]["axiom"], "mcr");
    assert_eq!(run(dir.path(), &["audit", "w.json"]).0, 2);

    let (code, _, _) = run(dir.path(), &["search", "--agg", "dictator:1", "--family", "grid:3", "--m", "2", "--axiom", "mcr,idc"]);
    assert_eq!(code, 0);
}

#[test]
fn pivot_reports_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, _) = run(dir.path(), &["pivot", "--agg", "dictator:1", "--Y", "3", "--m", "3", "--out", "p.json"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("conclusion: dictator_found(1)"));
    let p = read_json(dir.path(), "p.json");
    assert_eq!(p["conclusion"], json!({"type": "dictator_found", "model": 1}));
    assert_eq!(run(dir.path(), &["audit", "p.json"]).0, 0);

    let (code, _, _) = run(dir.path(), &["pivot", "--agg", "borda", "--pair", "b,c", "--out", "q.json"]);
    assert_eq!(code, 2);
    let q = read_json(dir.path(), "q.json");
    assert_eq!(q["conclusion"]["type"], "axiom_violation");
    assert_eq!(q["pair"], json!(["b", "c"]));
    assert_eq!(run(dir.path(), &["audit", "q.json"]).0, 2);
}

#[test]
fn table1_prints_four_decimals() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, _) = run(dir.path(), &["table1", "--out", "t.json"]);
    assert_eq!(code, 0);
    assert!(out.contains("0.4000  0.3967  0.2033"), "{out}");
    assert!(out.contains("0.4000  0.4033  0.1967"), "{out}");
    let t = read_json(dir.path(), "t.json");
    assert_eq!(t["points"][0]["aggregate"][1], "119/300");
    assert_eq!(t["points"][1]["choice"], json!(["2"]));
    assert_eq!(run(dir.path(), &["audit", "t.json"]).0, 2);
}

#[test]
fn simulate_writes_the_run_table() {
    let dir = tempfile::tempdir().unwrap();
    let base = ["simulate", "--n-schedule", "50,500", "--seeds", "2", "--n-mc", "100", "--pairs", "100"];
    let (code, out, _) = run(dir.path(), &[&base[..], &["--out", "runs.csv", "--summary", "sum.csv"]].concat());
    assert_eq!(code, 0);
    assert!(out.starts_with("n,mean_disagreement"));
    let runs = std::fs::read_to_string(dir.path().join("runs.csv")).unwrap();
    let lines: Vec<&str> = runs.lines().collect();
    assert_eq!(lines[0], "n,seed,disagreement,mcr_rate");
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("50,0,"));

    let (_, out, _) = run(dir.path(), &[&base[..], &["--oracle"]].concat());
    for line in out.lines().skip(1) {
        assert!(line.ends_with(",0.000000,0.000000,0.000000,0.000000"), "{line}");
    }
    let (_, out, _) = run(dir.path(), &[&base[..], &["--m", "1"]].concat());
    assert!(out.lines().nth(1).unwrap().ends_with("NA,NA"), "{out}");

    let problem = json!({"labels": ["x", "y"], "cells": [{"hi": "1/2", "p": {"x": "9/10", "y": "1/10"}}, {"hi": 1, "p": {"x": "1/5", "y": "4/5"}}]});
    write(dir.path(), "problem.json", &problem);
    assert_eq!(run(dir.path(), &[&base[..], &["--problem", "problem.json", "--nearby", "1/100"]].concat()).0, 0);
    let tied = json!({"labels": ["x", "y"], "cells": [{"hi": 1, "p": {"x": "1/2", "y": "1/2"}}]});
    write(dir.path(), "tied.json", &tied);
    let (code, _, err) = run(dir.path(), &[&base[..], &["--problem", "tied.json"]].concat());
    assert_eq!(code, 1);
    assert!(err.contains("tied"), "{err}");
}

#[test]
fn errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.json"), "{\"labels\": [\"a\",\n  \"b\"").unwrap();
    let (code, _, err) = run(dir.path(), &["audit", "--agg", "soft_voting", "bad.json"]);
    assert_eq!(code, 1);
    assert!(err.contains("line 2"), "{err}");

    assert_eq!(run(dir.path(), &["search", "--agg", "soft_voting", "--frobnicate"]).0, 1);
    assert_eq!(run(dir.path(), &["search", "--agg", "no_such_rule"]).0, 1);
    assert_eq!(run(dir.path(), &[]).0, 1);
    let (code, _, err) = run(dir.path(), &["search", "--agg", "soft_voting", "--Y", "6", "--m", "5"]);
    assert_eq!(code, 1);
    assert!(err.contains("too large"), "{err}");
    assert_eq!(run(dir.path(), &["pivot", "--agg", "soft_voting", "--Y", "2"]).0, 1);
    assert_eq!(run(dir.path(), &["audit", "--agg", "soft_voting", "missing.json"]).0, 1);
    assert_eq!(run(dir.path(), &["--help"]).0, 0);

    // a tampered witness no longer reproduces
    run(dir.path(), &["table1", "--out", "t.json"]);
    let mut t = read_json(dir.path(), "t.json");
    t["witness"]["choices"][1] = json!(["1"]);
    write(dir.path(), "t.json", &t);
    let (code, _, err) = run(dir.path(), &["audit", "t.json"]);
    assert_eq!(code, 1);
    assert!(err.contains("does not reproduce"), "{err}");
}

#[test]
fn outputs_do_not_depend_on_workers() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["search", "--agg", "soft_voting", "--family", "grid:4", "--m", "2", "--budget", "10", "--all-menus"];
    assert_eq!(run(dir.path(), &[&args[..], &["--out", "a.json"]].concat()).0, 2);
    assert_eq!(run(dir.path(), &[&args[..], &["--out", "b.json", "--sequential"]].concat()).0, 2);
    assert_eq!(std::fs::read(dir.path().join("a.json")).unwrap(), std::fs::read(dir.path().join("b.json")).unwrap());
    // no temporary files are left behind
    let names: Vec<_> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(names.len(), 2, "{names:?}");
}
