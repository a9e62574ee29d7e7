//! The binary end to end: exit codes, report shapes and file outputs.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn marclab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_marclab"))
        .args(args)
        .env_remove("MARCLAB_TOL")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout))
    })
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

const STEP: &str = r#"{"pieces":[{"value":2,"measure":"1/4"},{"value":-3,"measure":"1/8"},{"value":1,"measure":0.5}],"L":1}"#;

#[test]
fn norm_of_an_indicator() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "f.json", r#"{"pieces":[{"value":1,"measure":"1/4"}],"L":1}"#);
    let out = marclab(&["norm", "--phi", "power_log:0.5,0,1", "--f", &f]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["schema_version"], 1);
    // m: phi(1/4) * 1 = 1/2; M: sup sqrt(t) min(1, 1/(4t)) = 1/2 at t = 1/4
    assert!((v["m"]["value"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert!((v["M"]["value"].as_f64().unwrap() - 0.5).abs() < 1e-9);
    let only_m = json(&marclab(&["norm", "--phi", "power_log:0.5,0,1", "--f", &f, "--case", "m"]));
    assert!(only_m.get("M").is_none());
}

#[test]
fn exact_rearrangement_keeps_rationals() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "f.json", STEP);
    let v = json(&marclab(&["rearrange", "--f", &f, "--exact"]));
    assert_eq!(v["rearrangement"]["breaks"], serde_json::json!(["0", "1/8", "3/8", "7/8"]));
    assert_eq!(v["rearrangement"]["values"], serde_json::json!(["3", "2", "1"]));
    assert_eq!(v["maximal"]["cumulative"], serde_json::json!(["0", "3/8", "7/8", "11/8"]));
    assert_eq!(v["l1_norm"], "11/8");
}

#[test]
fn superadd_writes_csv_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("d.svg");
    let out = marclab(&[
        "superadd", "--case", "m", "--phi", "power_log:0.5,0,1", "--m", "2..4", "--gamma", "1,2",
        "--svg", svg.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "# schema_version=1");
    assert_eq!(lines[1], "m,gamma,sum_norm,defect");
    assert_eq!(lines.len(), 2 + 3 * 2);
    assert!(lines[2].starts_with("2,1.0,"));
    assert!(fs::read_to_string(svg).unwrap().starts_with("<svg"));

    let empty = marclab(&["superadd", "--case", "m", "--phi", "power_log:0.5,0,1", "--m", "5..4"]);
    assert!(empty.status.success());
    assert_eq!(String::from_utf8(empty.stdout).unwrap().lines().count(), 2);
}

#[test]
fn identity_is_refused_with_exit_one() {
    let out = marclab(&["superadd", "--case", "M", "--phi", "power_log:1,0,1", "--m", "2..3"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("positive and finite"));
}

#[test]
fn usage_and_input_errors_exit_two() {
    assert_eq!(marclab(&["norm", "--phi", "nonsense", "--f", "x.json"]).status.code(), Some(2));
    assert_eq!(marclab(&["certify", "linf", "--cert", "/no/such/file.json"]).status.code(), Some(2));
    assert_eq!(marclab(&["pack", "--n", "2"]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", "{\"pieces\": [}");
    let out = marclab(&["rearrange", "--f", &bad]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));

    let future = write(dir.path(), "v2.json", r#"{"schema_version":2,"certificate":{"r":1,"members":[],"pair_attestations":[]}}"#);
    let out = marclab(&["certify", "linf", "--cert", &future]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("schema_version"));
}

#[test]
fn packing_report() {
    let v = json(&marclab(&["pack", "--n", "2", "--ratio", "1/64"]));
    assert_eq!(v["pass"], true);
    assert_eq!(v["packing"]["level"], 2);
    assert_eq!(v["packing"]["count"], 16);
    assert_eq!(v["packing"]["centers"].as_array().unwrap().len(), 16);
    let out = marclab(&["pack", "--n", "1", "--ratio", "2"]);
    assert_eq!(out.status.code(), Some(1));
}

fn linf_cert(r: f64) -> String {
    let members: Vec<Value> = (0..4)
        .map(|j| serde_json::json!({"pieces":[{"value":1,"measure":"1/4","at":[format!("{j}/4"), format!("{}/4", j + 1)]}],"L":1}))
        .collect();
    let pairs: Vec<Value> = (0..4)
        .flat_map(|i| (i + 1..4).map(move |j| serde_json::json!({"i":i,"j":j,"x_distance":1.0})))
        .collect();
    serde_json::json!({"schema_version":1,"certificate":{"r":r,"members":members,"pair_attestations":pairs,"centers":2}}).to_string()
}

#[test]
fn linf_certificate_verdicts_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(dir.path(), "good.json", &linf_cert(0.9));
    let trace = dir.path().join("trace.csv");
    let out = marclab(&["certify", "linf", "--cert", &good, "--trace-csv", trace.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(json(&out)["verdict"], "PASS");
    let csv = fs::read_to_string(trace).unwrap();
    assert!(csv.starts_with("# schema_version=1\nlabel,quantity,value\n"));
    assert!(csv.contains("members,ell,4.0"));

    let bad = write(dir.path(), "bad.json", &linf_cert(1.0));
    let out = marclab(&["certify", "linf", "--cert", &bad]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["verdict"], "FAIL");
    assert_eq!(v["failed_condition"]["condition"], "sup_norm");
}

#[test]
fn witness_params_pass_their_own_checks() {
    let out = marclab(&["witness-params", "--phi", "power_log:1,0,1", "--case", "M", "--norm-t", "2", "--lambda", "1", "--m", "3"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["params"]["case"], "C3");
    assert!(v["checks"].as_array().unwrap().iter().all(|c| c["pass"] == true));
}

#[test]
fn phi_report_and_tolerance_from_env() {
    let v = json(&marclab(&["phi", "--phi", "power_log:0.5,0,1"]));
    assert_eq!(v["classification"]["is_quasiconcave"], "yes");
    assert_eq!(v["quasinorm_constants"][1]["value"], 1.0);
    let out = Command::new(env!("CARGO_BIN_EXE_marclab"))
        .args(["phi", "--phi", "power_log:0.5,0,1"])
        .env("MARCLAB_TOL", "-1")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn out_flag_writes_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ineq.json");
    let out = marclab(&["ineq", "--pairs", "10", "--points", "5", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(v["failures"], 0);
}
