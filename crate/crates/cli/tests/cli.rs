use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn spec(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pca-duality")).args(args).output().unwrap()
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}", String::from_utf8_lossy(&out.stderr));
    })
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn verify_reports_exact_residuals() {
    let dir = TempDir::new().unwrap();
    let dk = spec(&dir, "dk.json", r#"{"family":"dk","a":[0.1,0.3,0.6]}"#);
    let out = run(&["verify", "--model", p(&dk), "--class", "voter", "--L", "4", "--smax", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["manifest"]["subcommand"], "verify");
    assert_eq!(v["manifest"]["seed"], 0);
    assert_eq!(v["manifest"]["params"]["length"], 4);
    assert_eq!(v["manifest"]["model_sha256"].as_str().unwrap().len(), 64);
    let r = &v["result"];
    assert_eq!(r["configurations"], 16);
    assert!(r["max_residual_one_step"].as_f64().unwrap() <= 1e-12);
    let per_s = r["max_residual_per_s"].as_array().unwrap();
    assert_eq!(per_s.len(), 3);
    assert!(per_s.iter().all(|x| x.as_f64().unwrap() <= 1e-10));
}

#[test]
fn ergodicity_unknown_is_not_an_error() {
    let dir = TempDir::new().unwrap();
    let dk = spec(&dir, "dk_060909.json", r#"{"family":"dk","a":[0,0.6,0.9]}"#);
    let out = run(&["check-ergodicity", "--model", p(&dk)]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_of(&out)["result"]["verdict"], "unknown");

    let ergodic = spec(&dir, "dk.json", r#"{"family":"dk","a":[0,0.4,0.9]}"#);
    let v = json_of(&run(&["check-ergodicity", "--model", p(&ergodic)]));
    assert_eq!(v["result"]["verdict"], "ergodic");
}

#[test]
fn malformed_spec_exits_2_with_location() {
    let dir = TempDir::new().unwrap();
    let bad = spec(&dir, "bad.json", "{\"family\": \"dk\",\n \"a\": [0.1, 0.3 0.6]}");
    let out = run(&["validate", "--model", p(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "rejected");
    assert_eq!(err["error"]["line"], 2);
    assert!(err["error"]["column"].as_u64().unwrap() > 0);
}

#[test]
fn rejections_exit_2() {
    let dir = TempDir::new().unwrap();
    let dk = spec(&dir, "dk.json", r#"{"family":"dk","a":[0.1,0.3,0.6]}"#);
    // the starred orientation fails an inequality: report on stdout, exit 2
    let out = run(&["check", "--model", p(&dk), "--relabel", "2,1"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json_of(&out)["result"]["passed"], false);

    let out = run(&["solve-dual", "--model", p(&dk), "--relabel", "2,1"]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["verify", "--model", p(&dk), "--L", "40"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cap"));

    let out = run(&["validate", "--model", p(&dir.path().join("missing.json"))]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["verify", "--model", p(&dk), "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));

    let raw = spec(&dir, "raw.json", &format!(r#"{{"family":"raw","M":2,"p":[{}0.5,0.6]}}"#, "0.5,".repeat(14)));
    let out = run(&["validate", "--model", p(&raw)]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json_of(&out)["result"]["row_sum_violations"][0]["row"], serde_json::json!([2, 2, 2]));
}

#[test]
fn solve_dual_matches_closed_form() {
    let dir = TempDir::new().unwrap();
    let dk = spec(&dir, "dk.json", r#"{"family":"dk","a":[0.1,0.3,0.6]}"#);
    let v = json_of(&run(&["solve-dual", "--model", p(&dk)]));
    let op = &v["result"]["opinions"][0];
    assert!((op["weight"].as_f64().unwrap() - 0.6).abs() < 1e-12);
    assert!((op["moves"]["left"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-12);
    assert!((op["moves"]["centre"].as_f64().unwrap()).abs() < 1e-12);
}

#[test]
fn equilibrium_output_ignores_thread_count() {
    let dir = TempDir::new().unwrap();
    let dk = spec(&dir, "dk.json", r#"{"family":"dk","a":[0.1,0.3,0.6]}"#);
    let result = |threads: &str| {
        let out = run(&["equilibrium", "--model", p(&dk), "--replicas", "5000", "--seed", "9", "--threads", threads]);
        assert_eq!(out.status.code(), Some(0));
        json_of(&out)["result"].clone()
    };
    let one = result("1");
    assert_eq!(one, result("3"));
    assert_eq!(one["replicas"], 5000);
    assert!((one["estimate"].as_f64().unwrap() - 0.174).abs() < 0.03);
}

#[test]
fn crosscheck_csv_embeds_manifest() {
    let dir = TempDir::new().unwrap();
    let dk = spec(&dir, "dk.json", r#"{"family":"dk","a":[0.1,0.3,0.6]}"#);
    let out_path = dir.path().join("table.csv");
    let out = run(&[
        "crosscheck",
        "--model",
        p(&dk),
        "--L",
        "60",
        "--steps",
        "300",
        "--forward-replicas",
        "200",
        "--replicas",
        "5000",
        "--format",
        "csv",
        "--out",
        p(&out_path),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&out_path).unwrap();
    assert!(text.lines().any(|l| l == "# subcommand: crosscheck"));
    assert!(text.lines().any(|l| l.starts_with("# model_sha256: ")));
    let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(body.len(), 2);
    assert!(body[0].contains("dual.estimate") && body[0].contains("forward.1.estimate") && body[0].contains("max_z"));
}

#[test]
fn simulate_reports_densities_and_events() {
    let dir = TempDir::new().unwrap();
    let comp = spec(&dir, "comp.json", r#"{"family":"competition","M":2,"p":[0.05,0.05],"alpha":[0.7],"beta":[0.7]}"#);
    let out = run(&[
        "simulate",
        "--model",
        p(&comp),
        "--L",
        "30",
        "--steps",
        "50",
        "--replicas",
        "20",
        "--event",
        r#"{"constraints":[{"site":0,"values":[1,2]}]}"#,
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    let total: f64 = v["result"]["densities"].as_array().unwrap().iter().map(|d| d["density"].as_f64().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-12);
    assert_eq!(v["result"]["event"]["estimate"], 1.0);
}
