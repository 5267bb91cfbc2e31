use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("wvg-cli-{}-{name}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn wvg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wvg"))
        .args(args)
        .env_remove("WVG_ENUMERATE_CAP")
        .env_remove("WVG_MITM_CAP")
        .env_remove("WVG_SPARSE_STATE_CAP")
        .output()
        .unwrap()
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn or2(dir: &PathBuf) -> String {
    let p = dir.join("or2.cnf");
    fs::write(&p, "c x1 or x2\np cnf 2 1\n1 2 0\n").unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn index_of_small_game() {
    let dir = scratch("index");
    let g = dir.join("g.json");
    fs::write(&g, r#"{"weights":["2","1","1"],"quota":"3"}"#).unwrap();
    let v = json(&wvg(&["index", "--game", g.to_str().unwrap(), "--player", "1"]));
    assert_eq!(v["banzhaf"], "3/4");
    assert_eq!(v["shapley"], "2/3");

    let out = wvg(&["index", "--game", g.to_str().unwrap(), "--player", "4"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_agrees_on_or2() {
    let dir = scratch("verify");
    let cnf = or2(&dir);
    let v = json(&wvg(&["verify", "--cnf", &cnf, "--theorem", "thm1", "--k", "1"]));
    assert_eq!(v["agree"], true);
    assert_eq!(v["mode"], "full");
    assert_eq!(v["control"]["before"], "1/64");
}

#[test]
fn reduce_rejects_full_prefix() {
    let dir = scratch("reduce-k");
    let cnf = or2(&dir);
    let out = wvg(&["reduce", "--cnf", &cnf, "--theorem", "thm1", "--k", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn unknown_theorem_is_usage_error() {
    let dir = scratch("reduce-tag");
    let cnf = or2(&dir);
    let out = wvg(&["reduce", "--cnf", &cnf, "--theorem", "thm9", "--k", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn reduce_then_control_matches_verify() {
    let dir = scratch("round-trip");
    let cnf = or2(&dir);
    for (theorem, ell) in [("thm1", None), ("thm3a", None), ("thm3d_banzhaf", Some("2"))] {
        let mut args = vec!["--cnf", cnf.as_str(), "--theorem", theorem, "--k", "1"];
        if let Some(ell) = ell {
            args.extend(["--ell", ell]);
        }
        let inst = dir.join(format!("{theorem}.json"));
        let mut reduce = vec!["reduce", "--output", inst.to_str().unwrap()];
        reduce.extend(&args);
        json_status(&wvg(&reduce));
        let control = json(&wvg(&["control", "--instance", inst.to_str().unwrap()]));
        let mut verify = vec!["verify"];
        verify.extend(&args);
        let report = json(&wvg(&verify));
        assert_eq!(control, report["control"], "{theorem}");
        let audit = json(&wvg(&["validate", "--instance", inst.to_str().unwrap()]));
        let checks = audit["checks"].as_array().unwrap();
        assert!(checks.iter().all(|c| c["passed"] == true), "{theorem}: {audit}");
    }
}

fn json_status(out: &Output) {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn sat_and_gadget() {
    let dir = scratch("sat");
    let cnf = or2(&dir);
    let v = json(&wvg(&["sat", "--cnf", &cnf, "--problem", "emajsat", "--k", "1"]));
    assert_eq!(v["answer"], "yes");
    assert_eq!(v["witness_count"], "2");
    let v = json(&wvg(&["sat", "--cnf", &cnf, "--problem", "eexasat", "--k", "1", "--ell", "3"]));
    assert_eq!(v["answer"], "no");
    let out = wvg(&["sat", "--cnf", &cnf, "--problem", "eexasat", "--k", "1"]);
    assert_eq!(out.status.code(), Some(2));

    let v = json(&wvg(&["gadget", "--cnf", &cnf, "--k", "1", "--set", "1", "--bijection"]));
    assert_eq!(v["bijection"]["equal"], true);
    assert_eq!(v["bijection"]["models"], "3");
    let out = wvg(&["gadget", "--cnf", &cnf, "--k", "1", "--set", "7"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn capability_errors_exit_3() {
    let dir = scratch("cap");
    let g = dir.join("g.json");
    fs::write(&g, r#"{"weights":[1,1,1,1,1],"quota":3}"#).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_wvg"))
        .args(["--engine", "enumerate", "index", "--game", g.to_str().unwrap(), "--player", "1"])
        .env("WVG_ENUMERATE_CAP", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn malformed_dimacs_is_usage_error() {
    let dir = scratch("dimacs");
    let p = dir.join("bad.cnf");
    fs::write(&p, "p cnf 2 1\n1 -1 2 0\n").unwrap();
    let out = wvg(&["sat", "--cnf", p.to_str().unwrap(), "--problem", "emajsat", "--k", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn seed_suite_writes_corpus() {
    let dir = scratch("suite").join("corpus");
    let v = json(&wvg(&["--seed-suite", dir.to_str().unwrap(), "--max-vars", "2", "--max-clauses", "2"]));
    let count = v["formulas"].as_u64().unwrap() as usize;
    assert_eq!(fs::read_dir(&dir).unwrap().count(), count);
    // One variable: {x1}, {-x1}, {x1, -x1}; two variables add every
    // covering set of at most two of the eight non-tautological clauses.
    assert!(count > 3);
    let again = json(&wvg(&["--seed-suite", dir.to_str().unwrap(), "--max-vars", "2", "--max-clauses", "2"]));
    assert_eq!(v, again);
}

#[test]
fn threads_flag_is_accepted() {
    let dir = scratch("threads");
    let cnf = or2(&dir);
    let v = json(&wvg(&["--threads", "1", "verify", "--cnf", &cnf, "--theorem", "thm1", "--k", "1"]));
    assert_eq!(v["agree"], true);
}
