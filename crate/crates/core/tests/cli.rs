// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use acam::tree::DecisionTree;

fn acam(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_acam"))
        .current_dir(dir)
        .env_remove("ACAM_CONFIG")
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const RULE: &str = "{\"lo\":385,\"hi\":58630,\"width_bits\":16,\"label\":\"r0\"}\n";

#[test]
fn compile_writes_table_and_grid() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("rules.jsonl"), RULE).unwrap();
    let o = acam(dir.path(), &["--out", "out", "compile", "rules.jsonl", "--bits", "4"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let grid = fs::read_to_string(dir.path().join("out/table.txt")).unwrap();
    assert_eq!(grid.lines().count(), 6);
    let json = fs::read_to_string(dir.path().join("out/table.json")).unwrap();
    let table = acam::compiler::CamTable::from_json(&json).unwrap();
    assert_eq!(table.n_cells(), 24);
}

#[test]
fn compile_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("rules.jsonl"), RULE).unwrap();
    let a = acam(dir.path(), &["compile", "rules.jsonl", "--ternary"]);
    let b = acam(dir.path(), &["compile", "rules.jsonl", "--ternary"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout(&a).lines().count(), 20);
}

#[test]
fn empty_rules_give_empty_table() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("rules.jsonl"), "").unwrap();
    let o = acam(dir.path(), &["compile", "rules.jsonl", "--bits", "2"]);
    assert!(o.status.success());
    assert!(stdout(&o).is_empty());
}

#[test]
fn exit_codes_distinguish_failures() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("garbage.jsonl"), "not json\n").unwrap();
    fs::write(dir.path().join("bad.jsonl"), "{\"lo\":9,\"hi\":2,\"width_bits\":4}\n").unwrap();
    let code = |args: &[&str]| acam(dir.path(), args).status.code();
    assert_eq!(code(&["compile", "missing.jsonl", "--bits", "2"]), Some(1));
    assert_eq!(code(&["no-such-command"]), Some(2));
    assert_eq!(code(&["compile", "garbage.jsonl", "--bits", "2"]), Some(3));
    assert_eq!(code(&["compile", "bad.jsonl", "--bits", "2"]), Some(4));
}

#[test]
fn sweep_reports_band_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = acam(dir.path(), &["sweep", "--cell", "40,80", "--cols", "2", "--step", "5"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("v_dl,row,v_ml,matched"));
    assert_eq!(lines.count(), 201);
    assert!(String::from_utf8_lossy(&o.stderr).contains("match band [0.37"));
}

#[test]
fn sweep_warns_on_coarse_step() {
    let dir = tempfile::tempdir().unwrap();
    let o = acam(dir.path(), &["sweep", "--cell", "40,80", "--step", "300"]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
}

#[test]
fn classify_matches_traversal() {
    let dir = tempfile::tempdir().unwrap();
    let tree = DecisionTree::random(3, 5, 3, 16);
    fs::write(dir.path().join("tree.json"), tree.to_json().unwrap()).unwrap();
    let mut csv = String::from("a,b,c\n");
    let mut inputs = Vec::new();
    for i in 0..40u32 {
        let x = [f64::from(i % 17), f64::from((i * 7) % 17), f64::from((i * 11) % 17)];
        csv.push_str(&format!("{},{},{}\n", x[0], x[1], x[2]));
        inputs.push(x);
    }
    csv.push_str("1,oops,2\n");
    fs::write(dir.path().join("in.csv"), csv).unwrap();
    let o = acam(dir.path(), &["classify", "tree.json", "in.csv"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    let rows: Vec<&str> = out.lines().skip(1).collect();
    assert_eq!(rows.len(), 41);
    for (x, line) in inputs.iter().zip(&rows) {
        let label = line.split_once(',').unwrap().1;
        assert_eq!(label, tree.predict(x).unwrap());
    }
    assert!(rows[40].starts_with("40,error"));
}

#[test]
fn search_and_seeded_search() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("rules.jsonl"), RULE).unwrap();
    assert!(acam(dir.path(), &["--out", ".", "compile", "rules.jsonl", "--bits", "4"]).status.success());
    let o = acam(dir.path(), &["search", "table.json", "--query", "385"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["labels"], serde_json::json!(["r0"]));
    let o = acam(dir.path(), &["search", "table.json", "--query", "384"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["labels"], serde_json::json!([]));
    let seeded = ["--seed", "9", "--tol", "0.5", "search", "table.json", "--query", "385"];
    let a = acam(dir.path(), &seeded);
    let b = acam(dir.path(), &seeded);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn cost_text_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let o = acam(dir.path(), &["cost", "--rows", "86", "--cols", "12"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("539.9"));
    let o = acam(dir.path(), &["cost", "--rows", "86", "--cols", "12", "--no-dac", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let total = v["report"]["total_fj"].as_f64().unwrap();
    assert!((total - 487.8).abs() < 1e-6);
}

#[test]
fn calibrate_writes_usable_config() {
    let dir = tempfile::tempdir().unwrap();
    let o = acam(dir.path(), &["--out", "cal", "calibrate"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = acam(dir.path(), &["--config", "cal/config.json", "sweep", "--cell", "20,80"]);
    assert!(o.status.success());
}
