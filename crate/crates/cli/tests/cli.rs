//! End-to-end tests against the compiled binary: exit codes, determinism,
//! and the JSON round-trip back through explicit moments.

use std::process::{Command, Output};

const CHARLIER: &str = r#"{"kind":"charlier","mu":"1"}"#;

fn nucalc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nucalc"))
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn smop_csv_table() {
    let out = nucalc(&["smop", "--functional", CHARLIER, "--n", "2", "--out", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text, "0,1\n1,-1,1\n2,1,-3,1\n");
}

#[test]
fn identical_config_gives_identical_bytes() {
    let args = [
        "sobolev", "--u", CHARLIER, "--v", CHARLIER, "--nu", "omega:1", "--m", "1", "--lambda",
        "3/2", "--n", "6", "--method", "both",
    ];
    let first = nucalc(&args);
    let second = nucalc(&args);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);
    assert!(!first.stdout.is_empty());
}

#[test]
fn usage_error_for_forbidden_q() {
    let out = nucalc(&["smop", "--functional", CHARLIER, "--n", "2", "--nu", "q:1"]);
    assert_eq!(out.status.code(), Some(64));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("--nu"), "stderr: {err}");
    assert!(err.contains("q must avoid"), "stderr: {err}");
}

#[test]
fn usage_error_for_nonpositive_lambda() {
    let out = nucalc(&[
        "sobolev", "--u", CHARLIER, "--v", CHARLIER, "--nu", "omega:1", "--m", "1", "--lambda",
        "0", "--n", "3",
    ]);
    assert_eq!(out.status.code(), Some(64));
}

#[test]
fn coherence_fit_failure_exits_one() {
    let out = nucalc(&[
        "coherence-fit",
        "--u",
        CHARLIER,
        "--v",
        r#"{"kind":"charlier","mu":"2"}"#,
        "--nu",
        "omega:1",
        "--M",
        "0",
        "--N",
        "0",
        "--m",
        "1",
        "--k",
        "0",
        "--n",
        "4",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("no coherence"), "stderr: {err}");
}

#[test]
fn sobolev_both_methods_agree_on_lowering_pair() {
    let out = nucalc(&[
        "sobolev", "--u", CHARLIER, "--v", CHARLIER, "--nu", "omega:1", "--m", "1", "--lambda",
        "2", "--n", "8", "--method", "both",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    // the degenerate coherent pair keeps the plain sequence
    assert_eq!(doc["polys"][1], serde_json::json!(["-1", "1"]));
    assert_eq!(doc["polys"][2], serde_json::json!(["1", "-3", "1"]));
}

#[test]
fn smop_json_reimports_as_explicit_moments() {
    let out = nucalc(&["smop", "--functional", CHARLIER, "--n", "5"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let moments = doc["moments"].as_array().unwrap().clone();
    let respec = serde_json::json!({"kind": "moments", "values": moments}).to_string();
    let again = nucalc(&["smop", "--functional", &respec, "--n", "5"]);
    assert!(again.status.success());
    let doc2: serde_json::Value = serde_json::from_slice(&again.stdout).unwrap();
    assert_eq!(doc["polys"], doc2["polys"]);
    assert_eq!(doc["alpha"], doc2["alpha"]);
    assert_eq!(doc["beta"], doc2["beta"]);
    assert_eq!(doc["norms"], doc2["norms"]);
}

#[test]
fn pearson_finds_the_charlier_pair() {
    let out = nucalc(&[
        "pearson",
        "--functional",
        CHARLIER,
        "--nu",
        "omega:1",
        "--deg-sigma",
        "1",
        "--deg-tau",
        "1",
    ]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["sigma"], serde_json::json!(["0", "1"]));
    assert_eq!(doc["tau"], serde_json::json!(["1", "-1"]));
    assert_eq!(doc["class_bound"], serde_json::json!(0));
}

#[test]
fn coherence_fit_verify_round_trip_via_files() {
    let dir = tempfile::tempdir().unwrap();
    let data_path = dir.path().join("coherence.json");
    let out = nucalc(&[
        "coherence-fit",
        "--u",
        CHARLIER,
        "--v",
        CHARLIER,
        "--nu",
        "omega:1",
        "--M",
        "1",
        "--N",
        "1",
        "--m",
        "1",
        "--k",
        "0",
        "--n",
        "5",
        "--out-file",
        data_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let verify = nucalc(&[
        "coherence-verify",
        "--u",
        CHARLIER,
        "--v",
        CHARLIER,
        "--nu",
        "omega:1",
        "--data",
        data_path.to_str().unwrap(),
    ]);
    assert_eq!(verify.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&verify.stdout).unwrap();
    assert_eq!(doc["verified"], serde_json::json!(true));
}

#[test]
fn functional_spec_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let spec_path = dir.path().join("kravchuk.json");
    std::fs::write(&spec_path, r#"{"kind":"kravchuk","N":4,"p":"1/2"}"#).unwrap();
    let out = nucalc(&[
        "smop",
        "--functional",
        spec_path.to_str().unwrap(),
        "--n",
        "2",
        "--out",
        "csv",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("0,1\n1,-2,1\n"), "got: {text}");
}
