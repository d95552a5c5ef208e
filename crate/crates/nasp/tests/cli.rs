use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nasp"))
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("nasp-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn run(args: &[&str]) -> (i32, String) {
    let out = bin().args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap())
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn generate(dir: &Path, name: &str, args: &[&str]) -> PathBuf {
    let f = dir.join(name);
    let mut all = vec!["generate", "--out", p(&f)];
    all.extend_from_slice(args);
    assert_eq!(run(&all).0, 0, "generate {args:?}");
    f
}

#[test]
fn matching_pennies_has_only_a_mixed_equilibrium() {
    let d = scratch("pennies");
    let inst = generate(&d, "mp.json", &["--family", "matching-pennies"]);
    let (code, out) = run(&["solve", "--in", p(&inst), "--algorithm", "pure"]);
    assert_eq!(code, 2);
    assert_eq!(serde_json::from_str::<Value>(&out).unwrap()["status"], "NoEquilibrium");
    let (code, out) = run(&["solve", "--in", p(&inst), "--algorithm", "full"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["status"], "Mne");
    for l in v["leaders"].as_array().unwrap() {
        let probs: Vec<f64> = l["support"].as_array().unwrap().iter().map(|s| s["probability"].as_f64().unwrap()).collect();
        assert_eq!(probs.len(), 2);
        assert!(probs.iter().all(|x| (x - 0.5).abs() < 1e-6));
    }
}

#[test]
fn tampered_probabilities_are_an_input_error() {
    let d = scratch("tamper");
    let inst = generate(&d, "mp.json", &["--family", "matching-pennies"]);
    let res = d.join("res.json");
    assert_eq!(run(&["solve", "--in", p(&inst), "--out", p(&res)]).0, 0);
    assert_eq!(run(&["validate", "--in", p(&inst), "--result", p(&res)]).0, 0);
    let text = std::fs::read_to_string(&res).unwrap().replacen("\"probability\": 0.5", "\"probability\": 0.6", 1);
    std::fs::write(&res, text).unwrap();
    assert_eq!(run(&["validate", "--in", p(&inst), "--result", p(&res)]).0, 4);
}

#[test]
fn validate_rejects_a_non_equilibrium() {
    let d = scratch("nonequilibrium");
    let inst = generate(&d, "mp.json", &["--family", "matching-pennies"]);
    let res = d.join("res.json");
    run(&["solve", "--in", p(&inst), "--out", p(&res)]);
    // both leaders pure on their first unit vector: the second one wants out
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(&res).unwrap()).unwrap();
    for l in v["leaders"].as_array_mut().unwrap() {
        let first = l["support"][0]["point"].clone();
        let x0 = first[0].as_f64().unwrap();
        let keep = if x0 > 0.5 { 0 } else { 1 };
        let chosen = l["support"][keep].clone();
        l["support"] = Value::Array(vec![chosen]);
        l["support"][0]["probability"] = 1.0.into();
    }
    std::fs::write(&res, serde_json::to_string(&v).unwrap()).unwrap();
    let (code, out) = run(&["validate", "--in", p(&inst), "--result", p(&res)]);
    assert_eq!(code, 1);
    assert_eq!(serde_json::from_str::<Value>(&out).unwrap()["equilibrium"], false);
}

#[test]
fn round_trip_on_small_energy_markets() {
    let d = scratch("roundtrip");
    for seed in 0..20 {
        let s = seed.to_string();
        let inst = generate(&d, &format!("e{seed}.json"), &["--seed", &s, "--countries", "2", "--followers", "1..2"]);
        let res = d.join(format!("r{seed}.json"));
        let code = run(&["solve", "--in", p(&inst), "--algorithm", "inner", "--out", p(&res)]).0;
        assert!(code == 0 || code == 2, "seed {seed}: solve exit {code}");
        let v = run(&["validate", "--in", p(&inst), "--result", p(&res)]).0;
        assert_eq!(v, code, "seed {seed}");
        if code == 0 {
            let csv = d.join(format!("r{seed}.csv"));
            let (rc, out) = run(&["report", "--in", p(&inst), "--result", p(&res), "--csv", p(&csv)]);
            assert_eq!(rc, 0);
            let rep: Value = serde_json::from_str(&out).unwrap();
            assert_eq!(rep["countries"].as_array().unwrap().len(), 2);
            assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 3);
        }
    }
}

#[test]
fn results_are_byte_identical_across_runs() {
    let d = scratch("determinism");
    let inst = generate(&d, "e.json", &["--seed", "11"]);
    for algo in [&["--algorithm", "full"][..], &["--algorithm", "inner", "--strategy", "rand", "--seed", "4", "--k", "2"]] {
        let mut args = vec!["solve", "--in", p(&inst)];
        args.extend_from_slice(algo);
        let a = run(&args).1;
        let b = run(&args).1;
        assert_eq!(a, b);
        assert!(!a.contains("wall_time"));
    }
    let mut args = vec!["solve", "--in", p(&inst), "--timing"];
    args.extend_from_slice(&["--algorithm", "full"]);
    assert!(run(&args).1.contains("wall_time"));
}

#[test]
fn batch_mode_writes_one_result_per_instance() {
    let d = scratch("batch");
    let a = generate(&d, "a.json", &["--family", "matching-pennies"]);
    let b = generate(&d, "b.json", &["--family", "unbounded-pursuit", "--seed", "3"]);
    let out = d.join("results");
    let (code, _) = run(&["solve", "--in", p(&a), p(&b), "--jobs", "2", "--out", p(&out)]);
    // the worst outcome wins: the pursuit game has no equilibrium
    assert_eq!(code, 2);
    let ra: Value = serde_json::from_str(&std::fs::read_to_string(out.join("a.result.json")).unwrap()).unwrap();
    let rb: Value = serde_json::from_str(&std::fs::read_to_string(out.join("b.result.json")).unwrap()).unwrap();
    assert_eq!(ra["status"], "Mne");
    assert_eq!(rb["status"], "NoEquilibrium");
}

#[test]
fn bad_input_and_exhausted_time() {
    let d = scratch("errors");
    let junk = d.join("junk.json");
    std::fs::write(&junk, "{\"kind\": \"energy\"}").unwrap();
    assert_eq!(run(&["solve", "--in", p(&junk)]).0, 4);
    assert_eq!(run(&["solve", "--in", p(&d.join("missing.json"))]).0, 4);
    let inst = generate(&d, "h.json", &["--family", "mne-hardness", "--q", "1,2", "--p", "1", "--t", "3", "--r", "1"]);
    assert_eq!(run(&["solve", "--in", p(&inst), "--timelimit", "0"]).0, 4);
    let (code, out) = run(&["solve", "--in", p(&inst), "--timelimit", "1e-9"]);
    assert_eq!(code, 3);
    assert_eq!(serde_json::from_str::<Value>(&out).unwrap()["status"], "TimeLimit");
    // trade with a single country is rejected by the generator
    assert_eq!(run(&["generate", "--countries", "1"]).0, 4);
    assert_eq!(run(&["generate", "--family", "pne-hardness", "--q", "1", "--p", "1", "--t", "2"]).0, 4);
}

#[test]
fn report_needs_an_energy_instance() {
    let d = scratch("report");
    let inst = generate(&d, "mp.json", &["--family", "matching-pennies"]);
    let res = d.join("res.json");
    run(&["solve", "--in", p(&inst), "--out", p(&res)]);
    assert_eq!(run(&["report", "--in", p(&inst), "--result", p(&res)]).0, 4);
}
