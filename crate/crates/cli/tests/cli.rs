use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

struct Run {
    stdout: String,
    stderr: String,
    code: i32,
}

fn parastat(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_parastat")).args(args).env_remove("PARASTAT_CACHE_DIR").output().unwrap();
    Run {
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
        code: out.status.code().unwrap(),
    }
}

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name).to_string_lossy().into_owned()
}

fn schema_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas")
}

fn check_schema(name: &str, doc: &Value) {
    let schema: Value = serde_json::from_str(&fs::read_to_string(schema_dir().join(format!("{name}.schema.json"))).unwrap()).unwrap();
    let compiled = jsonschema::JSONSchema::compile(&schema).unwrap();
    let msgs: Vec<String> = match compiled.validate(doc) {
        Ok(()) => return,
        Err(errors) => errors.map(|e| format!("{} at {}", e, e.instance_path)).collect(),
    };
    panic!("{name} output violates its schema: {msgs:?}");
}

fn ok_json(args: &[&str]) -> Value {
    let r = parastat(args);
    assert_eq!(r.code, 0, "{args:?} failed: {}", r.stderr);
    let doc: Value = serde_json::from_str(&r.stdout).unwrap();
    check_schema(args[0], &doc);
    doc
}

fn failing(args: &[&str], code: i32) -> Value {
    let r = parastat(args);
    assert_eq!(r.code, code, "{args:?}: stdout {} stderr {}", r.stdout, r.stderr);
    assert!(r.stdout.is_empty());
    let doc: Value = serde_json::from_str(&r.stderr).unwrap();
    check_schema("error", &doc);
    doc
}

fn variant<'a>(doc: &'a Value, label: &str) -> &'a Value {
    doc["result"]["variants"].as_array().unwrap().iter().find(|v| v["label"] == label).unwrap()
}

#[test]
fn planar_threshold_lists_labelled_variants() {
    let doc = ok_json(&["threshold", "--n", "10000", "--dim", "2"]);
    assert_eq!(doc["schema_version"], "1.0.0");
    let leading = variant(&doc, "k0_leading");
    assert!((leading["k0"].as_f64().unwrap() - 359.1).abs() < 0.05);
    assert_eq!(leading["method"], "leading_order");
    assert_eq!(variant(&doc, "k0_erdos")["method"], "erdos_two_term");
    assert!(doc["result"]["constants"]["c"].as_f64().is_some());
}

#[test]
fn fractional_threshold_has_numeric_cross_check() {
    let doc = ok_json(&["threshold", "--n", "10000", "--alpha", "0.5"]);
    let general = variant(&doc, "k0_general")["k0"].as_f64().unwrap();
    let check = &doc["result"]["cross_check"];
    let numeric = check["k0_numeric"].as_f64().unwrap();
    assert!((check["relative_difference"].as_f64().unwrap() - (numeric - general) / general).abs() < 1e-12);
}

#[test]
fn usage_errors_exit_2() {
    let e = failing(&["threshold", "--n", "-5"], 2);
    assert_eq!(e["error"]["kind"], "usage");
    failing(&["threshold", "--n", "100"], 2);
    failing(&["threshold", "--n", "100", "--alpha", "1.5"], 2);
    failing(&["condense", "--n", "100", "--k", "20"], 2);
    failing(&["partition-sample", "--n", "10"], 2);
    failing(&["frobnicate"], 2);
}

#[test]
fn help_is_not_an_error() {
    let r = parastat(&["--help"]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.contains("condense"));
}

#[test]
fn condense_reports_band_and_is_reproducible() {
    let args = ["condense", "--n", "10000", "--k", "auto3", "--samples", "200", "--seed", "7"];
    let first = parastat(&args);
    assert_eq!(first.code, 0, "{}", first.stderr);
    let second = parastat(&args);
    assert_eq!(first.stdout, second.stdout);
    let doc: Value = serde_json::from_str(&first.stdout).unwrap();
    check_schema("condense", &doc);
    let r = &doc["result"];
    let k0 = r["threshold"]["k0"].as_f64().unwrap();
    assert_eq!(r["k"].as_u64().unwrap(), (3.0 * k0).round() as u64);
    assert!(r["median_band_pass"].is_boolean());
    assert_eq!(r["convergence"]["samples"], 200);
}

#[test]
fn thread_count_does_not_change_condense_output() {
    let base = ["condense", "--n", "600", "--k", "auto2", "--samples", "40", "--seed", "11"];
    let one = parastat(&base);
    let mut more = base.to_vec();
    more.extend(["--threads", "3"]);
    assert_eq!(one.stdout, parastat(&more).stdout);
}

#[test]
fn sample_floor_is_raised_with_warning() {
    let doc = ok_json(&["condense", "--n", "400", "--k", "40", "--samples", "1", "--seed", "1"]);
    assert_eq!(doc["result"]["summary"]["samples"], 30);
    assert!(doc["warnings"][0].as_str().unwrap().contains("30"));
}

#[test]
fn table_budget_exit_3() {
    let e = failing(&["condense", "--n", "1000000", "--k", "100000", "--seed", "1"], 3);
    assert_eq!(e["error"]["code"], "budget_exceeded");
}

#[test]
fn partition_sample_formats() {
    let doc = ok_json(&["partition-sample", "--n", "20", "--k", "4", "--samples", "5", "--seed", "9"]);
    for s in doc["result"]["samples"].as_array().unwrap() {
        let parts: Vec<u64> = s["parts"].as_array().unwrap().iter().map(|p| p.as_u64().unwrap()).collect();
        assert_eq!(parts.iter().sum::<u64>(), 20);
        assert!(parts.len() <= 4 && parts.windows(2).all(|w| w[0] >= w[1]));
    }
    let csv = parastat(&["partition-sample", "--n", "20", "--k", "4", "--samples", "5", "--seed", "9", "--format", "csv"]);
    assert!(csv.stdout.starts_with("sample,parts_total,n0,parts\n"));
    assert_eq!(csv.stdout.lines().count(), 6);
    let exact = ok_json(&["partition-sample", "--n", "20", "--k", "4", "--samples", "5", "--seed", "9", "--convention", "exactly-k"]);
    assert!(exact["result"]["samples"].as_array().unwrap().iter().all(|s| s["parts_total"] == 4));
}

#[test]
fn solve_and_constants_validate() {
    let doc = ok_json(&["solve", "--n", "10000", "--k", "500"]);
    let res = doc["result"]["params"]["residuals"].as_array().unwrap();
    assert!(res.iter().all(|r| r.as_f64().unwrap().abs() < 1e-8));
    let doc = ok_json(&["constants"]);
    let rows = doc["result"].as_array().unwrap();
    assert!(rows.iter().all(|r| r["abs_error_estimate"].as_f64().unwrap() >= 0.0));
    let zeta2 = rows.iter().find(|r| r["name"] == "bose_integral" && r["alpha"] == 1.0).unwrap();
    assert!((zeta2["value"].as_f64().unwrap() - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-12);
    let csv = parastat(&["constants", "--format", "csv"]);
    assert!(csv.stdout.starts_with("name,alpha,value,abs_error_estimate,method\n"));
}

#[test]
fn bundled_portfolio_matches_committed_verdict() {
    let r = parastat(&["debt", "--input", &fixture("sample_portfolio.csv"), "--window", "365"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(r.stdout, fs::read_to_string(fixture("sample_portfolio.verdict.json")).unwrap());
    check_schema("debt", &serde_json::from_str(&r.stdout).unwrap());
}

#[test]
fn stretch_sweep_flips_at_most_once() {
    let doc = ok_json(&["debt", "--input", &fixture("sample_portfolio.csv"), "--window", "365", "--stretch", "1.5"]);
    let sweep = &doc["result"]["stretch"];
    assert_eq!(sweep["points"].as_array().unwrap().len(), 21);
    assert!(sweep["flips"].as_u64().unwrap() <= 1);
    let ts: Vec<f64> =
        sweep["points"].as_array().unwrap().iter().map(|p| p["verdict"]["mean_duration_T"].as_f64().unwrap()).collect();
    assert!(ts.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn debt_data_errors_cite_the_row() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "size,duration\n10,30\n5,abc\n4,10\n").unwrap();
    let e = failing(&["debt", "--input", bad.to_str().unwrap()], 4);
    assert_eq!(e["error"]["row"], 2);
    assert_eq!(e["error"]["code"], "malformed_input");
    fs::write(&bad, "size,duration\n10,30\n5,20\n-4,10\n").unwrap();
    let e = failing(&["debt", "--input", bad.to_str().unwrap()], 4);
    assert_eq!(e["error"]["row"], 3);
    assert_eq!(e["error"]["code"], "non_positive_value");
}

#[test]
fn plot_out_writes_both_series() {
    let dir = tempfile::tempdir().unwrap();
    let plot = dir.path().join("plot.csv");
    ok_json(&["debt", "--input", &fixture("sample_portfolio.csv"), "--plot-out", plot.to_str().unwrap()]);
    let text = fs::read_to_string(&plot).unwrap();
    assert!(text.starts_with("series,x,y\n"));
    assert!(text.lines().any(|l| l.starts_with("lambda,")));
    assert_eq!(text.lines().filter(|l| l.starts_with("flow,")).count(), 16);
}

#[test]
fn flicker_fixture_recovers_one_over_f() {
    let doc = ok_json(&["flicker", "--input", &fixture("flicker_1f.csv")]);
    let alpha = doc["result"]["verdict"]["alpha_fit"].as_f64().unwrap();
    assert!((alpha - 1.0).abs() <= 0.15, "alpha_fit = {alpha}");
    assert!(doc["result"]["spectrum"]["parseval_residual"].as_f64().unwrap() < 1e-8);
}

#[test]
fn constant_series_is_refused() {
    let e = failing(&["flicker", "--input", &fixture("constant_series.csv")], 4);
    assert_eq!(e["error"]["code"], "ill_conditioned_fit");
}

#[test]
fn flicker_csv_spectrum_table() {
    let r = parastat(&["flicker", "--input", &fixture("flicker_1f.csv"), "--format", "csv"]);
    assert_eq!(r.code, 0);
    let mut lines = r.stdout.lines();
    assert_eq!(lines.next(), Some("i,a_i,A_l"));
    assert_eq!(lines.count(), 257);
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("spec.csv");
    ok_json(&["flicker", "--input", &fixture("flicker_1f.csv"), "--spectrum-out", out.to_str().unwrap()]);
    assert_eq!(fs::read_to_string(out).unwrap(), r.stdout);
}

#[test]
fn config_file_sits_between_flags_and_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    fs::write(&cfg, "# shared settings\nsamples = 40\nseed = 5\ndelta1 = 0.2\n").unwrap();
    let c = cfg.to_str().unwrap();
    let from_file = ok_json(&["condense", "--n", "400", "--k", "120", "--config", c]);
    assert_eq!(from_file["result"]["summary"]["samples"], 40);
    assert_eq!(from_file["result"]["seed"], 5);
    assert_eq!(from_file["result"]["band"]["delta1"], 0.2);
    let flag = ok_json(&["condense", "--n", "400", "--k", "120", "--config", c, "--samples", "35", "--seed", "6"]);
    assert_eq!(flag["result"]["summary"]["samples"], 35);
    assert_eq!(flag["result"]["seed"], 6);
    let defaults = ok_json(&["condense", "--n", "400", "--k", "120", "--seed", "5"]);
    assert_eq!(defaults["result"]["summary"]["samples"], 200);
    fs::write(&cfg, "colour = red\n").unwrap();
    failing(&["threshold", "--n", "100", "--dim", "2", "--config", c], 2);
}

#[test]
fn cache_directory_is_filled_and_reused() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["--seed", "3", "partition-sample", "--n", "300", "--k", "25", "--samples", "5"];
    let run = || Command::new(env!("CARGO_BIN_EXE_parastat")).args(args).env("PARASTAT_CACHE_DIR", dir.path()).output().unwrap();
    let first = run();
    assert!(first.status.success());
    let cached: Vec<_> = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(cached.len(), 1, "{cached:?}");
    let stamp = fs::metadata(&cached[0]).unwrap().modified().unwrap();
    let second = run();
    assert_eq!(second.stdout, first.stdout);
    assert_eq!(fs::metadata(&cached[0]).unwrap().modified().unwrap(), stamp);
    assert_eq!(parastat(&args).stdout.as_bytes(), first.stdout.as_slice());
}
