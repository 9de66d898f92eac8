use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn tracelab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tracelab"))
        .args(args)
        .env_remove("TRACELAB_PRECISION_BITS")
        .output()
        .expect("binary runs")
}

fn ok_stdout(args: &[&str]) -> String {
    let out = tracelab(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    tracelab(args).status.code().expect("exit code")
}

fn schema_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas").join(format!("{name}.schema.json"))
}

fn assert_valid(name: &str, doc: &Value) {
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(schema_path(name)).unwrap()).unwrap();
    let compiled = jsonschema::JSONSchema::compile(&schema).expect("schema compiles");
    let msgs: Vec<String> = match compiled.validate(doc) {
        Ok(()) => Vec::new(),
        Err(errors) => errors.map(|e| format!("{e} at {}", e.instance_path)).collect(),
    };
    assert!(msgs.is_empty(), "{name}: {msgs:?}");
}

fn json(args: &[&str]) -> Value {
    serde_json::from_str(&ok_stdout(args)).unwrap()
}

#[test]
fn build_ypiece_json_document() {
    let doc = json(&["build-ypiece", "--tx", "3", "--ty", "3", "--json"]);
    assert_valid("build_ypiece", &doc);
    assert_eq!(doc["product"]["b"], "6");
    assert_eq!(doc["product_trace"], "2");
    assert_eq!(doc["tu"]["a"], "3");
}

#[test]
fn build_ypiece_svg_has_circles() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("pair.svg");
    ok_stdout(&["build-ypiece", "--tx", "3", "--ty", "3", "--svg", svg.to_str().unwrap()]);
    let text = std::fs::read_to_string(svg).unwrap();
    assert!(text.matches("<circle").count() >= 4);
    assert!(text.contains("C(T_u)") && text.contains("I(T_u)^-1"));
}

#[test]
fn build_ypiece_exit_codes() {
    assert_eq!(code(&["build-ypiece", "--tx", "1.5"]), 3);
    assert_eq!(code(&["build-ypiece", "--tx", "1.5", "--elliptic", "--ty", "3"]), 0);
    assert_eq!(code(&["build-ypiece", "--tx", "three"]), 2);
    assert_eq!(code(&["build-ypiece", "--tx", "3/0"]), 2);
    assert_eq!(code(&["build-ypiece"]), 2);
}

#[test]
fn gen_traces_matches_golden() {
    let golden = include_str!("golden/gen_traces_3_2_cap50.csv");
    assert_eq!(ok_stdout(&["gen-traces", "--tx", "3", "--ty", "2", "--cap", "50"]), golden);
    assert_eq!(
        ok_stdout(&["--threads", "4", "gen-traces", "--tx", "3", "--ty", "2", "--cap", "50"]),
        golden
    );
}

#[test]
fn gen_traces_budget_zero_and_rational_seed() {
    let seed_only = ok_stdout(&["gen-traces", "--tx", "3", "--ty", "2", "--cap", "50", "--budget", "0"]);
    assert_eq!(seed_only, "value_num,value_den,rule_chain\n2,1,seed#y\n3,1,seed#x\n");
    let rational = ok_stdout(&["gen-traces", "--tx", "5/2", "--cap", "100"]);
    assert!(rational.lines().any(|l| l.ends_with(",4,COLLAPSE#x") && l.starts_with("73,")));
}

#[test]
fn cluster_stats_from_seed() {
    let doc = json(&["cluster-stats", "--tx", "3", "--ty", "2"]);
    assert_valid("growth_report", &doc);
    assert_eq!(doc["bc_bound_estimate"], 1);
    assert_eq!(doc["gap_estimate"], "1");
}

#[test]
fn cluster_stats_empty_input() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("empty.csv");
    std::fs::write(&csv, "value_num,value_den,rule_chain\n").unwrap();
    let doc = json(&["cluster-stats", "--input", csv.to_str().unwrap()]);
    assert_valid("growth_report", &doc);
    assert_eq!(doc["sample_size"], 0);
    assert_eq!(doc["bc_bound_estimate"], 0);
    assert_eq!(doc["gap_estimate"], Value::Null);
    assert_eq!(code(&["cluster-stats"]), 2);
}

#[test]
fn cluster_stats_on_witness_values() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("values.csv");
    let doc = json(&["construct-cluster", "--a", "9", "--b", "2", "--n", "3", "--values-csv", csv.to_str().unwrap()]);
    assert_valid("cluster_witness", &doc);
    let stats = json(&["cluster-stats", "--input", csv.to_str().unwrap()]);
    assert_valid("growth_report", &stats);
    assert_eq!(stats["bc_bound_estimate"], 4);
    let full_bins: Vec<&Value> = stats["bins"].as_array().unwrap().iter().filter(|b| b["count"] != 0).collect();
    assert_eq!(full_bins.len(), 1);
}

#[test]
fn construct_cluster_outputs() {
    let doc = json(&["construct-cluster", "--a", "9", "--b", "2", "--n", "3"]);
    assert_valid("cluster_witness", &doc);
    for check in ["invariants", "values_in_generated_set", "rule_replay"] {
        assert_eq!(doc["checks"][check], true, "{check}");
    }
    assert_eq!(doc["witness"]["values"].as_array().unwrap().len(), 4);
    let refute = json(&["construct-cluster", "--a", "9", "--b", "2", "--refute-bc", "5"]);
    assert_eq!(refute["witness"]["values"].as_array().unwrap().len(), 6);
    assert_eq!(code(&["construct-cluster", "--a", "7", "--b", "1", "--n", "2"]), 3);
    assert_eq!(code(&["construct-cluster", "--a", "9", "--b", "2"]), 2);
    assert_eq!(code(&["construct-cluster", "--a", "9", "--b", "2", "--n", "6", "--max-bits", "1000"]), 4);
}

#[test]
fn counterexample_reports() {
    let doc = json(&["counterexample", "--a", "5", "--b", "2", "--levels", "3", "--cap", "1000"]);
    assert_valid("counterexample", &doc);
    assert_eq!(doc["all_checks_pass"], true);
    assert_eq!(doc["union"]["actual"], 858);
    assert!(doc["collisions"]["count"].as_u64().unwrap() > 0);
    let single = json(&["counterexample", "--a", "5", "--b", "2", "--levels", "0"]);
    assert_eq!(single["union"]["bound"], "4008/5");
    assert_eq!(code(&["counterexample", "--a", "3", "--b", "2"]), 3);
    assert_eq!(code(&["counterexample", "--a", "x", "--b", "2"]), 2);
}

#[test]
fn enumerate_and_check_arithmetic() {
    let dir = tempfile::tempdir().unwrap();
    let census = dir.path().join("census.csv");
    ok_stdout(&["enumerate", "--modular", "--max-len", "5", "--output", census.to_str().unwrap()]);
    let text = std::fs::read_to_string(&census).unwrap();
    for t in 0..=3 {
        assert!(text.lines().any(|l| l.starts_with(&format!("{t},1,"))), "missing {t}");
    }
    let report = json(&["check-arithmetic", "--census", census.to_str().unwrap()]);
    assert_valid("integrality", &report);
    assert_eq!(report["all_integer"], true);

    let rational = dir.path().join("rational.csv");
    ok_stdout(&["enumerate", "--tx", "5/2", "--ty", "2", "--max-len", "1", "--output", rational.to_str().unwrap()]);
    let report = json(&["check-arithmetic", "--census", rational.to_str().unwrap()]);
    assert_valid("integrality", &report);
    assert_eq!(report["all_integer"], false);
    assert_eq!(report["violations"][0]["trace"], "5/2");
}

#[test]
fn enumerate_gen_file() {
    let dir = tempfile::tempdir().unwrap();
    let gens = dir.path().join("gens.json");
    std::fs::write(&gens, r#"{"u": ["0", "-1", "1", "0"], "v": ["1", "1", "0", "1"]}"#).unwrap();
    let via_file = ok_stdout(&["enumerate", "--gen-file", gens.to_str().unwrap(), "--max-len", "4"]);
    let modular = ok_stdout(&["enumerate", "--modular", "--max-len", "4"]);
    assert_eq!(via_file, modular);
    std::fs::write(&gens, r#"{"u": ["2", "0", "0", "1"], "v": ["1", "1", "0", "1"]}"#).unwrap();
    assert_eq!(code(&["enumerate", "--gen-file", gens.to_str().unwrap(), "--max-len", "2"]), 3);
}

#[test]
fn enumerate_exit_codes() {
    assert_eq!(code(&["enumerate", "--modular", "--max-len", "0"]), 2);
    assert_eq!(code(&["enumerate", "--max-len", "3"]), 2);
    assert_eq!(code(&["enumerate", "--modular", "--max-len", "20"]), 4);
    assert_eq!(code(&["enumerate", "--modular", "--max-len", "6", "--budget", "100"]), 4);
}

#[test]
fn manifest_records_digests() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("census.csv");
    let manifest = dir.path().join("manifest.json");
    ok_stdout(&[
        "--manifest",
        manifest.to_str().unwrap(),
        "enumerate",
        "--modular",
        "--max-len",
        "4",
        "--output",
        out.to_str().unwrap(),
    ]);
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&manifest).unwrap()).unwrap();
    assert_valid("manifest", &doc);
    assert_eq!(doc["command"], "enumerate");
    assert_eq!(doc["parameters"]["max_len"], 4);
    assert_eq!(doc["precision_bits"], 256);
    let digest = doc["outputs"][0]["sha256"].as_str().unwrap();
    let bytes = std::fs::read(&out).unwrap();
    use sha2::Digest;
    assert_eq!(digest, format!("{:x}", sha2::Sha256::digest(&bytes)));
}

#[test]
fn precision_override() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("m.json");
    let out = Command::new(env!("CARGO_BIN_EXE_tracelab"))
        .args(["--manifest", manifest.to_str().unwrap(), "counterexample", "--a", "5", "--b", "2", "--levels", "1"])
        .env("TRACELAB_PRECISION_BITS", "128")
        .output()
        .unwrap();
    assert!(out.status.success());
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&manifest).unwrap()).unwrap();
    assert_eq!(doc["precision_bits"], 128);
    let bad = Command::new(env!("CARGO_BIN_EXE_tracelab"))
        .args(["counterexample", "--a", "5", "--b", "2"])
        .env("TRACELAB_PRECISION_BITS", "ten")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
