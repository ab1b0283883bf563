use std::path::PathBuf;
use std::process::{Command, Output};

use padelic::rational::parse_rational;
use padelic::UnitPhase;
use serde_json::Value;

fn padelic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_padelic"))
        .args(args)
        .env_remove("PADELIC_ORACLE_BUDGET")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn error(out: &Output) -> Value {
    serde_json::from_slice::<Value>(&out.stderr).expect("structured error")["error"].clone()
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("padelic-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

#[test]
fn lambda_and_local_symbols() {
    let out = padelic(&["lambda", "--v", "3", "--x", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), r#"{"phase":"1/4"}"#);
    assert_eq!(json(&padelic(&["lambda", "--v", "inf", "--x", "-1"]))["phase"], "1/8");
    assert_eq!(json(&padelic(&["hilbert", "--v", "2", "--a", "2", "--b", "3"]))["sign"], -1);
    assert_eq!(json(&padelic(&["legendre", "--a", "2", "--p", "7"]))["symbol"], 1);
    assert_eq!(json(&padelic(&["chi", "--v", "inf", "--x", "1/4"]))["phase"], "3/4");
}

#[test]
fn adelic_products() {
    let out = padelic(&["adelic-product", "norm", "--x", "6"]);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), r#"{"product":"1"}"#);
    assert_eq!(json(&padelic(&["adelic-product", "lambda", "--x", "-7/12"]))["product"], "0");
    assert_eq!(json(&padelic(&["adelic-product", "hilbert", "--x", "2", "--y", "3"]))["product"], 1);
    assert_eq!(json(&padelic(&["adelic-product", "chi", "--x", "1/6"]))["product"], "0");
    assert_eq!(padelic(&["adelic-product", "norm", "--x", "0"]).status.code(), Some(1));
}

#[test]
fn gauss_closed_form_and_oracle() {
    let closed = json(&padelic(&["gauss", "--v", "3", "--alpha", "3"]));
    assert_eq!(closed["magSq"], "3");
    assert_eq!(closed["phase"], "1/4");
    let oracle = json(&padelic(&["gauss", "--v", "3", "--alpha", "3", "--oracle"]));
    assert!(oracle["re"].as_f64().unwrap().abs() < 1e-9);
    assert!((oracle["im"].as_f64().unwrap() - 3f64.sqrt()).abs() < 1e-9);
    let two = json(&padelic(&["gauss", "--v", "3", "--alpha", "1,1;1,2", "--beta", "1/3,0"]));
    let brute = json(&padelic(&["gauss", "--v", "3", "--alpha", "1,1;1,2", "--beta", "1/3,0", "--oracle", "--n", "2"]));
    let phase = parse_rational(two["phase"].as_str().unwrap()).unwrap();
    let angle = std::f64::consts::TAU * padelic::rational::to_f64(&phase);
    assert!((brute["re"].as_f64().unwrap() - angle.cos()).abs() < 1e-9);
    assert!((brute["im"].as_f64().unwrap() - angle.sin()).abs() < 1e-9);
}

#[test]
fn free_particle_kernel_from_file() {
    let free = scratch("free.json", r#"{"n": 1, "A": [[["1"]]]}"#);
    let f = free.to_str().unwrap();
    let real = json(&padelic(&["kernel", "--valuation", "inf", "--lagrangian", f, "--t1", "0", "--t2", "2", "--x1", "0", "--x2", "1", "--h", "1"]));
    assert_eq!(real["magSq"], "1/2");
    // λ_∞(+1/4)·χ_∞(−1/4): 7/8 + 1/4.
    assert_eq!(real["phase"], "1/8");
    assert_eq!(real["valuation"], "inf");
    assert_eq!(real["detBbar"], "-1/2");
    assert_eq!(real["action"], "1/4");
    let three = json(&padelic(&["kernel", "--valuation", "3", "--lagrangian", f, "--t1", "0", "--t2", "3", "--x1", "0", "--x2", "1"]));
    assert_eq!(three["magSq"], "3");
    assert_eq!(three["phase"], "1/12");
    let action = json(&padelic(&["action", "--lagrangian", f, "--t1", "0", "--t2", "2"]));
    assert_eq!(action["bBar"], serde_json::json!([["-1/2"]]));
    assert_eq!(action["epsBar"], "0");
}

#[test]
fn oscillator_and_two_dimensional_files() {
    let osc = scratch("osc.json", r#"{"n": 1, "A": [[["1"]]], "C": [[["-1"]]]}"#);
    let out = json(&padelic(&["action", "--lagrangian", osc.to_str().unwrap(), "--t1", "0", "--t2", "1/2"]));
    let b = parse_rational(out["bBar"][0][0].as_str().unwrap()).unwrap();
    let expected = -1.0 / 0.5f64.sin();
    assert!((padelic::rational::to_f64(&b) - expected).abs() < 1e-6);
    let pair = scratch("pair.json", r#"{"n": 2, "A": [[["1"], ["0"]], [["0"], ["1"]]]}"#);
    let k = padelic(&["kernel", "--valuation", "5", "--lagrangian", pair.to_str().unwrap(), "--t1", "0", "--t2", "5", "--x1", "0,0", "--x2", "1,-1"]);
    assert_eq!(k.status.code(), Some(0), "{}", String::from_utf8_lossy(&k.stderr));
    assert_eq!(json(&k)["magSq"], "25");
}

#[test]
fn adelic_kernel_and_vacuum() {
    let out = json(&padelic(&["adelic-kernel", "--primes", "2,3,5", "--t1", "0", "--t2", "2", "--x1", "0", "--x2", "1"]));
    let per = out["perValuation"].as_object().unwrap();
    assert_eq!(per.len(), 4);
    assert_eq!(per["inf"]["magSq"], "1/2");
    assert_eq!(out["total"]["magSq"], "1");
    assert_eq!(out["total"]["phase"], "0");
    assert_eq!(out["tailCertificate"].as_array().unwrap().len(), 3);
    let ok = json(&padelic(&["vacuum", "--p", "3", "--t1", "0", "--t2", "1"]));
    assert_eq!(ok["holds"], true);
    let expected: Vec<u64> = ok["rows"].as_array().unwrap().iter().map(|r| r["expected"].as_u64().unwrap()).collect();
    assert_eq!(expected, vec![1, 1, 0]);
    let bad = json(&padelic(&["vacuum", "--p", "3", "--t1", "0", "--t2", "1/3"]));
    assert_eq!(bad["holds"], false);
}

#[test]
fn output_is_deterministic_and_reparses() {
    let args = ["adelic-kernel", "--primes", "3,5", "--t1", "1/2", "--t2", "7/3", "--x1", "-2/5", "--x2", "3"];
    let a = padelic(&args);
    let b = padelic(&args);
    assert_eq!(a.stdout, b.stdout);
    let doc = json(&a);
    for amp in doc["perValuation"].as_object().unwrap().values().chain([&doc["total"]]) {
        let m = amp["magSq"].as_str().unwrap();
        let p = amp["phase"].as_str().unwrap();
        assert_eq!(padelic::rational::format_rational(&parse_rational(m).unwrap()), m);
        assert_eq!(UnitPhase::parse(p).unwrap().to_string(), p);
    }
}

#[test]
fn exit_codes_and_structured_errors() {
    assert_eq!(padelic(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(padelic(&["lambda", "--v", "3", "--x", "1/0"]).status.code(), Some(2));
    assert_eq!(padelic(&["lambda", "--v", "9", "--x", "1"]).status.code(), Some(2));
    let missing = padelic(&["kernel", "--valuation", "3", "--lagrangian", "/nonexistent/free.json", "--t1", "0", "--t2", "1", "--x1", "0", "--x2", "0"]);
    assert_eq!(missing.status.code(), Some(1));
    assert_eq!(error(&missing)["precondition"], "lagrangian_file");
    let singular = padelic(&["kernel", "--valuation", "3", "--t1", "0", "--t2", "1", "--x1", "0,0", "--x2", "0"]);
    assert_eq!(singular.status.code(), Some(1));
    let guard = padelic(&["kernel", "--valuation", "3", "--lagrangian", scratch("o3.json", r#"{"n":1,"A":[[["1"]]],"C":[[["-1"]]]}"#).to_str().unwrap(), "--t1", "0", "--t2", "1/3", "--x1", "0", "--x2", "1"]);
    assert_eq!(guard.status.code(), Some(1));
    let e = error(&guard);
    assert_eq!(e["precondition"], "series_convergence");
    assert_eq!(e["valuation"], "3");
}

#[test]
fn config_and_budget_override() {
    let composite = scratch("composite.json", r#"{"primeSet": [2, 4]}"#);
    assert_eq!(padelic(&["verify", "--config", composite.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(padelic(&["lambda", "--v", "3", "--x", "1", "--config", "/nonexistent.json"]).status.code(), Some(2));
    let tiny = Command::new(env!("CARGO_BIN_EXE_padelic"))
        .args(["gauss", "--v", "3", "--alpha", "1/27", "--oracle", "--n", "3"])
        .env("PADELIC_ORACLE_BUDGET", "10")
        .output()
        .unwrap();
    assert_eq!(tiny.status.code(), Some(1));
    assert_eq!(error(&tiny)["precondition"], "oracle_budget");
    let text = padelic(&["lambda", "--v", "3", "--x", "3", "--format", "text"]);
    assert_eq!(String::from_utf8_lossy(&text.stdout), "phase = 1/4\n");
}

#[test]
fn verify_suite_passes_and_degrades() {
    let out = padelic(&["verify"]);
    let doc = json(&out);
    assert_eq!(out.status.code(), Some(0), "{doc}");
    let names: Vec<&str> = doc["suites"].as_array().unwrap().iter().map(|s| s["name"].as_str().unwrap()).collect();
    assert_eq!(names, padelic_cli::verify::suite_names());
    let low = scratch("low.json", r#"{"truncationOrder": 4}"#);
    let out = padelic(&["verify", "--only", "ac07", "--config", low.to_str().unwrap()]);
    let doc = json(&out);
    assert_eq!(out.status.code(), Some(0));
    assert!(!doc["suites"][0]["warnings"].as_array().unwrap().is_empty());
}
