use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_hardylab"));
    c.env_remove("HARDYLAB_TOLERANCE_SCALE");
    c
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("hardylab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

/// Runs with a JSON report file and returns (exit code, stdout, report).
fn report(name: &str, args: &[&str]) -> (i32, String, Value) {
    let path = tmp(name);
    let out = bin().args(args).arg("--output").arg(&path).output().unwrap();
    let text = std::fs::read_to_string(&path).unwrap_or_default();
    let json = serde_json::from_str(&text).unwrap_or(Value::Null);
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap(), json)
}

#[test]
fn eigencheck_example_passes() {
    let (code, stdout, r) = report("eig.json", &["eigencheck", "--a", "0.5", "--s", "0.25+3i", "--order", "512"]);
    assert_eq!(code, 0, "{stdout}");
    assert!(stdout.starts_with("eigencheck: PASS residual"));
    assert_eq!(stdout.lines().count(), 1);
    assert_eq!(r["verdict"], "pass");
    assert_eq!(r["config"]["s"], "0.25+3i");
    let res = &r["results"]["residual"];
    assert!(res["window_residual"].as_f64().unwrap() <= 1e-8 + res["budget"].as_f64().unwrap());
    assert!(r["timings"]["wall_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn classify_example() {
    let (code, stdout, r) = report("cls.json", &["classify", "--disk", "--map", "0.5,0.5,0,1"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("HyperbolicNonAutomorphism"));
    assert_eq!(r["results"]["kind"], "hyperbolic_non_automorphism");
    assert_eq!(r["results"]["universal_translate"], true);
    assert_eq!(r["results"]["lambda_region"]["inner"].as_f64(), Some(0.0));
    let outer = r["results"]["lambda_region"]["outer"].as_f64().unwrap();
    assert!((outer - 2f64.sqrt()).abs() < 1e-12);
    assert_eq!(r["verdict"], "none");
}

#[test]
fn afscan_example_hits() {
    let (code, _, r) = report("af.json", &["afscan", "--f", "example-h", "--a0", "0.5", "--grid", "1e-3"]);
    assert_eq!(code, 0);
    let hits: Vec<f64> = r["results"]["hits"].as_array().unwrap().iter().map(|h| h.as_f64().unwrap()).collect();
    assert_eq!(hits, vec![0.125, 0.25, 0.5]);
    assert_eq!(r["results"]["hits_on_powers"], true);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
    assert_eq!(run(&["bogus"]).status.code(), Some(1));
    assert_eq!(run(&["eigencheck", "--a", "0.5"]).status.code(), Some(1));
    assert_eq!(run(&["eigencheck", "--a", "1.5", "--s", "1"]).status.code(), Some(1));
    assert_eq!(run(&["eigencheck", "--a", "0.5", "--s", "1+2j"]).status.code(), Some(1));
    assert_eq!(run(&["eigencheck", "--a", "0.5", "--s", "-0.7"]).status.code(), Some(1));
    assert_eq!(run(&["classify", "--disk", "--halfplane", "--map", "1,0,0,1"]).status.code(), Some(1));
    assert_eq!(run(&["counting", "--map", "0.5,0.5,0,1", "--w", "1.2"]).status.code(), Some(1));
    // |λ| beyond the spectral radius: tail growth, verdict fail
    let out = run(&["shift-eigen", "--a", "2", "--b", "1", "--lambda", "0.9", "--output", tmp("se.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("shift-eigen: FAIL not_eigenvalue"));
}

#[test]
fn tolerance_scale_env() {
    let out = bin().env("HARDYLAB_TOLERANCE_SCALE", "zero").args(["eigencheck", "--a", "0.5", "--s", "1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let path = tmp("scaled.json");
    let out = bin()
        .env("HARDYLAB_TOLERANCE_SCALE", "10")
        .args(["eigencheck", "--a", "0.5", "--s", "1", "--output"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(r["tolerances"]["residual"].as_f64(), Some(1e-7));
}

#[test]
fn reports_are_reproducible() {
    let args = ["spectrum-sample", "--a", "0.25", "--radii", "4", "--angles", "6"];
    let (_, _, r1) = report("rep1.json", &[&args[..], &["--threads", "1"]].concat());
    let (_, _, r2) = report("rep2.json", &[&args[..], &["--threads", "3"]].concat());
    assert_eq!(r1["config_hash"], r2["config_hash"]);
    assert_eq!(r1["results"], r2["results"]);
    assert_eq!(r1["config_hash"].as_str().unwrap().len(), 64);
    let (_, _, r3) = report("rep3.json", &["spectrum-sample", "--a", "0.25", "--radii", "4", "--angles", "7"]);
    assert_ne!(r1["config_hash"], r3["config_hash"]);
}

#[test]
fn json_keys_are_sorted() {
    let (_, _, r) = report("sorted.json", &["inner-invariance", "--a", "0.5", "--b", "1"]);
    let keys: Vec<&String> = r.as_object().unwrap().keys().collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    assert_eq!(r["verdict"], "pass");
}

#[test]
fn csv_tables_and_fallback() {
    let path = tmp("orbit.csv");
    let out = bin()
        .args(["orbit", "--f", "power:1", "--a", "0.5", "--w", "0.3+0.2i", "--n-max", "10", "--format", "csv", "--output"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,re,im,modulus"));
    assert_eq!(lines.count(), 11);

    let path = tmp("count.csv");
    bin().args(["counting", "--map", "0.5,0.5,0,1", "--w", "0.75", "--format", "csv", "--output"]).arg(&path).output().unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("key,value\n"));
    assert!(text.contains("results.value,0.6931471805599453"));
}

#[test]
fn every_subcommand_runs() {
    let cases: &[&[&str]] = &[
        &["classify", "--halfplane", "--map", "1,1,0,1"],
        &["orbit", "--f", "eigen-sum:0", "--a", "0.5", "--w", "0.2"],
        &["zeros", "--f", "example-h", "--a", "0.5"],
        &["continue", "--f", "power:0.5", "--a", "0.5", "--s", "0.5", "--z", "-3+1i"],
        &["krylov", "--f", "poly:2,-3,1", "--a", "0.5", "--depth", "10", "--target", "power:1"],
        &["converge", "--s", "1", "--a", "0.5", "--n-max", "25", "--depth", "20"],
        &["nonminimal-gap", "--a", "0.5", "--b", "1"],
        &["paley-wiener", "--time-fn", "texp:2", "--w", "1,3-2i"],
        &["shift-model", "--a", "0.5", "--b", "1+1i", "--window", "10"],
        &["shift-eigen", "--a", "2", "--b", "1", "--grid-radii", "3", "--grid-angles", "4", "--window", "20"],
        &["caradus", "--a", "2", "--b", "1", "--lambda", "0", "--windows", "5,10"],
        &["cov-check", "--map", "0.5,0.5,0,1", "--f", "poly:0,1", "--radial", "256", "--angular", "256"],
    ];
    for (k, args) in cases.iter().enumerate() {
        let (code, stdout, r) = report(&format!("case{k}.json"), args);
        assert!(code == 0, "{args:?} exited {code}: {stdout}");
        assert_eq!(r["command"], args[0]);
        assert!(stdout.starts_with(&format!("{}: ", args[0])));
    }
}
