use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rankone::staralg::PhiContext;
use rankone::{RatFunc, RatFuncJson, ToleranceConfig};
use serde_json::Value;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn rankone(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rankone"))
        .args(args)
        .current_dir(data(""))
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is json")
}

fn parse(v: &Value) -> RatFunc {
    let j: RatFuncJson = serde_json::from_value(v.clone()).unwrap();
    j.to_ratfunc(&ToleranceConfig::default()).unwrap()
}

fn load(name: &str) -> RatFunc {
    let j: RatFuncJson = serde_json::from_str(&std::fs::read_to_string(data(name)).unwrap()).unwrap();
    j.to_ratfunc(&ToleranceConfig::default()).unwrap()
}

#[test]
fn similar_yes_with_witness() {
    let out = rankone(&["similar", "--phi", "phi1.json", "--r", "r05.json", "--s", "zero.json"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["verdict"], "YES");
    assert_eq!(v["witness"]["num"], serde_json::json!([[-0.5, 0.0]]));
    assert_eq!(v["witness"]["den"], serde_json::json!([[1.0, 0.0], [-0.5, 0.0]]));
    assert!(v["residual"].as_f64().unwrap() < 1e-12);
}

#[test]
fn similar_no_shows_ord_table() {
    let out = rankone(&["similar", "--phi", "phiz.json", "--r", "neg1.json", "--s", "zero.json"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["verdict"], "NO");
    let row = &v["cond_b"][0];
    assert_eq!((row["order"].as_u64(), row["ord_r"].as_u64()), (Some(1), Some(1)));
    assert_eq!((row["order"].as_u64(), row["ord_s"].as_u64()), (Some(1), Some(0)));
    assert!(v["witness"].is_null());
}

#[test]
fn pole_in_disc_exits_two() {
    let out = rankone(&["similar", "--phi", "phi1.json", "--r", "bad.json", "--s", "zero.json"]);
    assert_eq!(code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("0.5"), "{err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn zero_phi_exits_two() {
    let out = rankone(&["times", "--phi", "zero.json", "--r", "r05.json", "--s", "r05.json"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn boundary_verdict_exits_three() {
    // phi = 1, r = 1: 1 - Gamma_+ = 1 - z vanishes on the circle
    let out = rankone(&["similar", "--phi", "phi1.json", "--r", "one.json", "--s", "zero.json"]);
    assert_eq!(code(&out), 3);
    assert_eq!(json(&out)["verdict"], "BOUNDARY_AMBIGUOUS");
}

#[test]
fn unsound_truncation_exits_four() {
    let out = rankone(&["oracle", "--phi", "phi1.json", "--r", "near.json", "--w", "0.5,0", "--n", "8"]);
    assert_eq!(code(&out), 4);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&rankone(&["similar", "--phi", "phi1.json", "--r", "r05.json"])), 1);
    assert_eq!(code(&rankone(&["frobnicate"])), 1);
    assert_eq!(code(&rankone(&["times", "--phi", "missing.json", "--r", "r05.json", "--s", "r05.json"])), 1);
    assert_eq!(code(&rankone(&["times", "--phi", "phi1.json", "--r", "r05.json", "--s", "r05.json", "--tol-sigma-svd", "-1"])), 1);
}

#[test]
fn json_reports_are_byte_identical() {
    let args = ["analyze", "--phi", "phi_generic.json", "--r", "r_generic.json", "--pretty"];
    let a = rankone(&args);
    let b = rankone(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn printed_functions_reparse() {
    let tol = ToleranceConfig::default();
    let ctx = PhiContext::new(load("phi_generic.json"), &tol).unwrap();
    let r = load("r_generic.json");
    let out = rankone(&["analyze", "--phi", "phi_generic.json", "--r", "r_generic.json"]);
    let v = json(&out);
    assert!(parse(&v["gamma_plus"]).residual(&ctx.gamma_plus(&r), 64) < 1e-12);
    assert!(parse(&v["gamma_minus"]).residual(&ctx.gamma_minus_fn(&r).unwrap(), 64) < 1e-12);

    let out = rankone(&["times", "--phi", "phi_generic.json", "--r", "r_generic.json", "--s", "r05.json"]);
    let want = ctx.times(&r, &load("r05.json"));
    assert!(parse(&json(&out)["result"]).residual(&want, 64) < 1e-12);
}

#[test]
fn invert_reports_inverse() {
    let out = rankone(&["invert", "--phi", "phi_generic.json", "--t", "r_generic.json"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["invertible"], true);
    let tol = ToleranceConfig::default();
    let ctx = PhiContext::new(load("phi_generic.json"), &tol).unwrap();
    let t = load("r_generic.json");
    assert!(ctx.circle(&t, &parse(&v["inverse"])).taylor_norm(64) < 1e-10);
}

#[test]
fn oracle_rows_agree() {
    let out = rankone(&["oracle", "--phi", "phiz.json", "--r", "neg1.json", "--w", "0,0", "--k", "2"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["agree"], true);
    assert_eq!(v["rows"].as_array().unwrap().len(), 4);
}

#[test]
fn matrix_csv_export() {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let path = dir.join("matrix_export.csv");
    let out = rankone(&[
        "matrix",
        "--phi",
        "phi1.json",
        "--r",
        "near.json",
        "--n",
        "6",
        "--format",
        "csv",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "# U_r");
    assert_eq!(lines[1], "# n=6 window=6");
    assert_eq!(lines[2].split(',').count(), 12);
    assert_eq!(lines.iter().filter(|l| !l.starts_with('#')).count(), 2 * 7);
}

#[test]
fn matrix_json_export() {
    let out = rankone(&["matrix", "--phi", "phi1.json", "--r", "near.json", "--n", "5"]);
    let v = json(&out);
    assert_eq!(v["k_r"]["n"], 5);
    assert_eq!(v["u_r"]["entries"].as_array().unwrap().len(), 5);
}

#[test]
fn batch_preserves_order_and_codes() {
    let out = rankone(&["--batch", "manifest.json"]);
    assert_eq!(code(&out), 2);
    let v = json(&out);
    let jobs = v.as_array().unwrap();
    assert_eq!(jobs.len(), 3);
    assert_eq!(jobs[0]["report"]["verdict"], "YES");
    assert!(jobs[1]["report"]["result"].is_object());
    assert_eq!(jobs[2]["exit_code"], 2);
    assert!(jobs[2]["error"].as_str().unwrap().contains("0.5"));
    assert_eq!(rankone(&["--batch", "manifest.json"]).stdout, out.stdout);
}

#[test]
fn text_format_renders_fractions() {
    let out = rankone(&["similar", "--phi", "phi1.json", "--r", "r05.json", "--s", "zero.json", "--format", "text"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("verdict: YES"));
    assert!(text.contains("witness t = "));
}
