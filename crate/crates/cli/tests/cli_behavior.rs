//! Exit codes, scenario validation, seed-collision refusal, and record
//! schema checks for the `qterm-lab` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qterm-lab"))
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn tmp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("qterm-cli-test-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

#[test]
fn risk_on_constant_losses_is_flat() {
    let out = tmp_dir("risk");
    let output = run(&[
        "risk",
        "--scenario",
        scenario("risk_const.json").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--plot-data",
    ]);
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let plot =
        std::fs::read_to_string(out.join("risk-constant-losses__risk__seed1.plot.csv")).unwrap();
    for line in plot.lines().skip(1) {
        let term: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!((term - 0.3).abs() < 1e-12, "sweep row {line} is not constant");
    }
}

#[test]
fn malformed_scenario_names_the_field() {
    let out = tmp_dir("malformed");
    let bad = out.join("bad.json");
    std::fs::create_dir_all(&out).unwrap();
    std::fs::write(&bad, r#"{"name": "x", "seed": "not-a-number"}"#).unwrap();
    let output = run(&["risk", "--scenario", bad.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("seed"), "message must name the offending field: {stderr}");
}

#[test]
fn missing_section_is_a_scenario_error() {
    let out = tmp_dir("missing");
    let output = run(&[
        "mc",
        "--scenario",
        scenario("risk_const.json").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("`bound`"), "{stderr}");
}

#[test]
fn vacuous_bound_is_refused_with_exit_three() {
    let out = tmp_dir("vacuous");
    let output = run(&[
        "bounds",
        "--kind",
        "chernoff_unit",
        "--expected-sum",
        "100",
        "--epsilon-dev",
        "0",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(3));
}

#[test]
fn bounds_report_is_written() {
    let out = tmp_dir("bounds");
    let output = run(&[
        "bounds",
        "--kind",
        "pac_term",
        "--covering",
        "4",
        "--n",
        "100",
        "--epsilon-dev",
        "0.05",
        "--gamma-cov",
        "0.01",
        "--seed",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("pac_term__bounds__seed2.report.json")).unwrap())
            .unwrap();
    assert_eq!(report["vacuous"], serde_json::Value::Bool(false));
    assert!(report["value"].as_f64().unwrap() < 1e-30);
}

#[test]
fn gamma_outside_the_regime_exits_two() {
    let out = tmp_dir("regime");
    let output = run(&[
        "pac",
        "--scenario",
        scenario("pac_finite.json").to_str().unwrap(),
        "--gamma",
        "0.2",
        "--trials",
        "5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(2), "{}", String::from_utf8_lossy(&output.stderr));
}

#[test]
fn seed_collision_is_refused() {
    let out = tmp_dir("collision");
    let path = scenario("learn_smoke.json");
    let args =
        ["learn", "--scenario", path.to_str().unwrap(), "--trials", "2", "--out", out.to_str().unwrap()];
    let first = run(&args);
    assert!(first.status.success(), "{}", String::from_utf8_lossy(&first.stderr));
    let second = run(&args);
    assert_eq!(second.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&second.stderr).contains("seed collision"));
}

#[test]
fn records_carry_the_seed_and_validate() {
    let out = tmp_dir("schema");
    let output = run(&[
        "learn",
        "--scenario",
        scenario("learn_smoke.json").to_str().unwrap(),
        "--trials",
        "3",
        "--seed",
        "77",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let jsonl = std::fs::read_to_string(out.join("learn-smoke__learn__seed77.trials.jsonl")).unwrap();
    let mut trials = Vec::new();
    for line in jsonl.lines() {
        let record: serde_json::Value = serde_json::from_str(line).expect("valid JSON per line");
        assert_eq!(record["seed"].as_u64(), Some(77));
        assert_eq!(record["subcommand"].as_str(), Some("learn"));
        assert!(record["data"]["mu_hat"].as_f64().is_some());
        trials.push(record["trial"].as_u64().unwrap());
    }
    assert_eq!(trials, vec![0, 1, 2]);
}

#[test]
fn workers_do_not_change_the_stream() {
    let out1 = tmp_dir("workers1");
    let out2 = tmp_dir("workers2");
    let path = scenario("planted_search.json");
    let base = ["search", "--scenario", path.to_str().unwrap(), "--trials", "40"];
    let a = bin().args(base).args(["--workers", "1", "--out", out1.to_str().unwrap()]).output().unwrap();
    let b = bin().args(base).args(["--workers", "4", "--out", out2.to_str().unwrap()]).output().unwrap();
    assert!(a.status.success() && b.status.success());
    let ta = std::fs::read(out1.join("planted-search__search__seed7.trials.jsonl")).unwrap();
    let tb = std::fs::read(out2.join("planted-search__search__seed7.trials.jsonl")).unwrap();
    assert_eq!(ta, tb, "worker count must not alter the record stream");
}
