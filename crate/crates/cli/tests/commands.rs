use std::path::Path;
use std::process::{Command, Output};

use caching_cli::AccumulationReport;
use caching_core::rational::ratio;
use caching_core::solver::{solve, SolveResult};
use caching_core::{GameSpec, Variant};
use serde_json::Value;

fn caching(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_caching")).args(args).output().expect("binary runs")
}

fn ok_json(args: &[&str]) -> Value {
    let out = caching(args);
    assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn code(args: &[&str]) -> (i32, String) {
    let out = caching(args);
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stderr).into_owned())
}

#[test]
fn solve_values() {
    let v = ok_json(&["solve", "--n", "3", "--d", "3", "--k", "2", "--variant", "adversary"]);
    assert_eq!(v["value"], "3/5");
    let v = ok_json(&["solve", "--n", "3", "--d", "3", "--k", "2", "--variant", "random"]);
    assert_eq!(v["value"], "12/19");
    let v = ok_json(&["solve", "--n", "2", "--d", "1", "--k", "2"]);
    assert_eq!(v["value"], "1/1");
    let v = ok_json(&["solve", "--n", "3", "--d", "3", "--k", "2", "--no-symmetry"]);
    assert_eq!((v["value"].as_str(), v["symmetry"].as_bool()), (Some("3/5"), Some(false)));
}

#[test]
fn solve_result_round_trips() {
    let v = ok_json(&["solve", "--n", "3", "--d", "2", "--k", "2", "--variant", "random", "--plans"]);
    let parsed: SolveResult = serde_json::from_value(v["result"].clone()).unwrap();
    let direct = solve(&GameSpec::new(3, 2, 2, Variant::Random).unwrap()).unwrap();
    assert_eq!(parsed.value, direct.value);
    assert_eq!(parsed.searcher_plan, direct.searcher_plan);
    assert_eq!(parsed.hider_plan, direct.hider_plan);
    assert_eq!(serde_json::to_value(&parsed).unwrap(), v["result"]);
}

#[test]
fn exit_codes() {
    assert_eq!(code(&["solve", "--n", "4", "--d", "3", "--k", "2", "--budget", "5"]).0, 3);
    assert_eq!(code(&["solve", "--n", "2", "--d", "1", "--k", "3"]).0, 2);
    assert_eq!(code(&["solve", "--n", "3", "--d", "3", "--k", "2", "--variant", "cooperative"]).0, 2);
    assert_eq!(code(&["solve", "--n", "3", "--d", "3", "--k", "2", "--variant", "sideways"]).0, 2);
    assert_eq!(code(&["solve", "--n", "3"]).0, 2);
    assert_eq!(code(&["solve", "--n", "3", "--d", "1", "--k", "1", "--budget", "0"]).0, 2);
    assert_eq!(code(&["--help"]).0, 0);
}

#[test]
fn verify_builtins() {
    let v = ok_json(&["verify", "--family", "fig432"]);
    assert_eq!(v["value"], "2/5");
    assert_eq!(v["witness"]["allocation"].as_array().unwrap().len(), 4);
    assert_eq!(ok_json(&["verify", "--family", "d3", "--k", "3"])["value"], "9/28");
    assert_eq!(ok_json(&["verify", "--family", "random332", "--variant", "random"])["value"], "12/19");
    assert_eq!(ok_json(&["verify", "--family", "cooperative332", "--variant", "cooperative"])["value"], "2/3");
    let (c, err) = code(&["verify", "--family", "fig432", "--variant", "cooperative"]);
    assert_eq!(c, 2, "{err}");
    let (c, err) = code(&["verify", "--family", "nope"]);
    assert_eq!(c, 2);
    assert!(err.contains("fig432"), "{err}");
    assert_eq!(code(&["verify", "--family", "d3"]).0, 2);
}

#[test]
fn verify_files() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.json");
    std::fs::write(&good, caching_core::strategies::fig542().to_json()).unwrap();
    let path = good.to_str().unwrap();
    assert_eq!(ok_json(&["verify", "--file", path])["value"], "8/35");

    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"{"n":3,"d":2,"k":2,"root":{"mix":[{"p":"1","query":[0,1],"branches":{"0":{"mix":[{"p":"1","query":[0,2],"branches":{"1":"end"}}]}}}]}}"#,
    )
    .unwrap();
    let (c, err) = code(&["verify", "--file", bad.to_str().unwrap()]);
    assert_eq!(c, 2);
    assert!(err.contains("root.mix[0].branches.0.mix[0]"), "{err}");

    std::fs::write(&bad, "{not json").unwrap();
    assert_eq!(code(&["verify", "--file", bad.to_str().unwrap()]).0, 2);
    let missing = dir.path().join("missing.json");
    assert_eq!(code(&["verify", "--file", missing.to_str().unwrap()]).0, 2);
}

fn row(rows: &[Value], n: u64, d: u64, k: u64) -> &Value {
    rows.iter()
        .find(|r| (r["n"].as_u64(), r["d"].as_u64(), r["k"].as_u64()) == (Some(n), Some(d), Some(k)))
        .unwrap_or_else(|| panic!("no row ({n},{d},{k})"))
}

#[test]
fn accuracy_sweep() {
    let v = ok_json(&["sweep-accuracy", "--max-n", "5", "--max-d", "3", "--max-k", "2"]);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(row(rows, 4, 3, 2)["accurate"], true);
    assert_eq!(row(rows, 3, 3, 2)["accurate"], false);
    assert_eq!(row(rows, 3, 3, 2)["value"], "3/5");
    assert_eq!(v["findings"].as_array().unwrap().len(), 0, "{v}");

    let v = ok_json(&["sweep-accuracy", "--max-n", "5", "--max-d", "2", "--max-k", "3"]);
    for r in v["rows"].as_array().unwrap().iter().filter(|r| r["d"] == 2) {
        let (n, k) = (r["n"].as_u64().unwrap(), r["k"].as_u64().unwrap());
        assert_eq!(r["accurate"], n + 1 >= 2 * k, "({n},2,{k})");
    }

    let v = ok_json(&["sweep-accuracy", "--max-n", "0", "--max-d", "3", "--max-k", "2"]);
    assert!(v["rows"].as_array().unwrap().is_empty());
}

#[test]
fn sweep_reports_budget_stops_without_failing() {
    let v = ok_json(&["sweep-accuracy", "--max-n", "4", "--max-d", "3", "--max-k", "2", "--budget", "40"]);
    let rows = v["rows"].as_array().unwrap();
    assert!(row(rows, 4, 3, 2)["value"].is_null());
    assert_eq!(row(rows, 1, 1, 1)["value"], "1/1");
}

fn entries(cache: &Path) -> serde_json::Map<String, Value> {
    let v: Value = serde_json::from_str(&std::fs::read_to_string(cache).unwrap()).unwrap();
    assert_eq!(v["schema"], 1);
    v["entries"].as_object().unwrap().clone()
}

#[test]
fn cache_hits_and_rechecks() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache.json");
    let c = cache.to_str().unwrap();
    let args = ["solve", "--n", "3", "--d", "3", "--k", "2", "--variant", "random", "--cache", c];
    assert_eq!(ok_json(&args)["cached"], false);
    assert_eq!(ok_json(&args)["cached"], true);
    let mut recheck = args.to_vec();
    recheck.push("--recheck");
    assert_eq!(ok_json(&recheck)["value"], "12/19");

    // Symmetry on and off are stored side by side.
    let mut literal = args.to_vec();
    literal.push("--no-symmetry");
    assert_eq!(ok_json(&literal)["cached"], false);
    let stored = entries(&cache);
    assert_eq!(stored.len(), 2);
    assert!(stored.values().all(|e| e["value"] == "12/19" && e["tool_version"].is_string()));

    // No temporary files are left behind.
    let names: Vec<String> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    assert_eq!(names, vec!["cache.json"]);

    // A tampered entry is caught by --recheck only.
    let text = std::fs::read_to_string(&cache).unwrap().replace("12/19", "13/19");
    std::fs::write(&cache, text).unwrap();
    assert_eq!(ok_json(&args)["value"], "13/19");
    let (c4, err) = code(&recheck);
    assert_eq!(c4, 4, "{err}");
    assert!(err.contains("13/19"), "{err}");
}

#[test]
fn cache_rechecks_every_stored_entry() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("c.json");
    let c = cache.to_str().unwrap();
    for v in ["adversary", "random"] {
        ok_json(&["solve", "--n", "3", "--d", "3", "--k", "2", "--variant", v, "--cache", c]);
    }
    ok_json(&["sweep-accuracy", "--max-n", "4", "--max-d", "3", "--max-k", "2", "--cache", c]);
    let before = entries(&cache);
    let v = ok_json(&["sweep-accuracy", "--max-n", "4", "--max-d", "3", "--max-k", "2", "--cache", c, "--recheck"]);
    assert!(v["rows"].as_array().unwrap().iter().all(|r| r["cached"] == true));
    for v in ["adversary", "random"] {
        let out = ok_json(&["solve", "--n", "3", "--d", "3", "--k", "2", "--variant", v, "--cache", c, "--recheck"]);
        assert_eq!(out["cached"], true);
    }
    assert_eq!(entries(&cache), before);
}

#[test]
fn bad_cache_files_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("c.json");
    std::fs::write(&cache, r#"{"schema": 99, "entries": {}}"#).unwrap();
    let c = cache.to_str().unwrap();
    assert_eq!(code(&["solve", "--n", "2", "--d", "1", "--k", "1", "--cache", c]).0, 2);
    std::fs::write(&cache, "garbage").unwrap();
    assert_eq!(code(&["solve", "--n", "2", "--d", "1", "--k", "1", "--cache", c]).0, 2);
}

fn accumulation(extra: &[&str]) -> AccumulationReport {
    let mut args = vec!["accumulation"];
    args.extend_from_slice(extra);
    let v = ok_json(&args);
    let rep: AccumulationReport = serde_json::from_value(v.clone()).unwrap();
    assert_eq!(serde_json::to_value(&rep).unwrap(), v);
    rep
}

#[test]
fn accumulation_modes() {
    let r = accumulation(&["--n", "5", "--k", "3", "--d", "1", "--mode", "evaluate", "--dist", "1/5,1/5,1/5,1/5,1/5"]);
    assert_eq!((r.winning, r.total), (0, 10));
    let r = accumulation(&["--n", "5", "--k", "3", "--d", "1", "--mode", "ruckle"]);
    assert_eq!((r.r, r.winning), (Some(4), 0));
    let r = accumulation(&["--n", "5", "--k", "3", "--d", "5/3", "--mode", "exact"]);
    assert_eq!((r.losing, r.total), (7, 10));
    assert_eq!(r.probability, ratio(3, 10));
    let r = accumulation(&["--n", "5", "--k", "3", "--d", "2", "--mode", "exact"]);
    assert_eq!(r.losing, 4);
    let r = accumulation(&["--n", "5", "--k", "3", "--d", "2", "--mode", "evaluate", "--dist", "2,0,0,0,0"]);
    assert_eq!(r.probability, ratio(3, 5));
}

#[test]
fn accumulation_rejects_bad_input() {
    let base = ["accumulation", "--n", "5", "--k", "3", "--d", "1", "--mode", "evaluate"];
    assert_eq!(code(&base).0, 2);
    for dist in ["1/5,1/5", "1/2,1/2,1/2,0,0", "x,0,0,0,1", "-1,2,0,0,0"] {
        let mut args = base.to_vec();
        args.extend(["--dist", dist]);
        assert_eq!(code(&args).0, 2, "{dist}");
    }
    assert_eq!(code(&["accumulation", "--n", "9", "--k", "3", "--d", "2", "--mode", "exact"]).0, 2);
}

#[test]
fn young_diagram_commands() {
    assert_eq!(ok_json(&["plambda", "--n", "2", "--d", "2", "--lambda", "1"])["p_lambda"], "2/3");
    assert_eq!(ok_json(&["plambda", "--n", "20", "--d", "2", "--lambda", "1"])["p_lambda"], "2/21");
    assert_eq!(ok_json(&["plambda", "--n", "5", "--d", "3", "--lambda", "2,1"])["p_lambda"], "0/1");
    assert_eq!(code(&["plambda", "--n", "5", "--d", "3", "--lambda", "1,2"]).0, 2);
    assert_eq!(code(&["plambda", "--n", "5", "--d", "3", "--lambda", "a"]).0, 2);

    let v = ok_json(&["fractional-check", "--n", "20", "--d", "2", "--k", "3/2", "--lambda", "1"]);
    assert_eq!(v["p"], "1/2");
    assert_eq!(v["branches"].as_array().unwrap().len(), 4);
    assert!(v["checks"].as_array().unwrap().iter().all(|c| c["holds"] == true && c["lhs"] == c["rhs"]));
    let (c, err) = code(&["fractional-check", "--n", "5", "--d", "3", "--k", "5/2", "--lambda", "1"]);
    assert_eq!(c, 2);
    assert!(err.contains("n >= d * ceil(k)"), "{err}");
}

#[test]
fn table_format_and_approx() {
    let out = caching(&["solve", "--n", "3", "--d", "3", "--k", "2", "--format", "table", "--approx"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("3/5") && text.contains("0.600000") && text.contains("not exact"), "{text}");
    let v = ok_json(&["solve", "--n", "3", "--d", "3", "--k", "2", "--approx"]);
    assert_eq!(v["value"], "3/5");
    assert_eq!(v["approx_not_exact"]["value"], "0.600000");
    let plain = ok_json(&["solve", "--n", "3", "--d", "3", "--k", "2"]);
    assert!(plain.get("approx_not_exact").is_none());
}
