use std::process::{Command, Output};

use serde_json::Value;

fn udg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_udg"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn fixture(name: &str) -> String {
    format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn json(args: &[&str]) -> Value {
    let mut all = vec!["--json"];
    all.extend_from_slice(args);
    let out = udg(&all);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("valid json")
}

fn re_im(v: &Value) -> (f64, f64) {
    (v["re"].as_f64().unwrap(), v["im"].as_f64().unwrap())
}

fn assert_value(v: &Value, re: f64, tol: f64) {
    let (a, b) = re_im(v);
    assert!((a - re).abs() <= tol && b.abs() <= tol, "got {a} + {b}i, want {re}");
}

#[test]
fn eval_free_one_over_n() {
    let r = json(&["eval", "--trace", "free", "-n", "2", "u11 u11*"]);
    assert_value(&r["value"], 0.5, 1e-12);
    assert_eq!(r["command"], "eval");
    assert_eq!(r["inputs"]["word"], "u11 u11*");
}

#[test]
fn eval_tensor_matches_oracle() {
    let r = json(&["eval", "--trace", "tensor", "-n", "2", "u11 u11* u11 u11*"]);
    assert_value(&r["value"], 0.5, 1e-12);
    assert_value(&r["oracle"], 0.5, 1e-12);
    assert!(r["diff"].as_f64().unwrap() <= 1e-12);
}

#[test]
fn eval_n1_powers_vanish() {
    let r = json(&["eval", "--trace", "free", "-n", "1", "u11 u11 u11"]);
    assert_value(&r["value"], 0.0, 1e-14);
}

#[test]
fn human_output_prints_small_values_as_zero() {
    let out = udg(&["eval", "--trace", "free", "-n", "1", "u11 u11 u11"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("value: 0.0"), "{text}");
}

#[test]
fn convolve_absorption() {
    let r = json(&[
        "convolve",
        "--kind",
        "free",
        "--lhs",
        "character:I",
        "--rhs",
        "haar-free",
        "-n",
        "2",
        "u11 u11*",
    ]);
    assert_value(&r["value"], 0.5, 1e-12);
    let v = fixture("v_diag.json");
    let r = json(&[
        "convolve",
        "--kind",
        "tensor",
        "--lhs",
        "haar-tensor",
        "--rhs",
        &format!("character:{v}"),
        "-n",
        "2",
        "u11 u22*",
    ]);
    assert_value(&r["value"], 0.0, 1e-12);
}

#[test]
fn convolve_counit_any_kind() {
    for kind in ["free", "tensor", "boolean", "monotone", "anti-monotone"] {
        let r = json(&[
            "convolve", "--kind", kind, "--lhs", "counit", "--rhs", "counit", "-n", "2", "u12",
        ]);
        assert_value(&r["value"], 0.0, 1e-14);
    }
}

#[test]
fn convolve_mixture_with_haar() {
    let m = fixture("mixture.json");
    let r = json(&[
        "convolve",
        "--kind",
        "free",
        "--lhs",
        &format!("mixture:{m}"),
        "--rhs",
        "haar-free",
        "-n",
        "2",
        "u12 u12*",
    ]);
    assert_value(&r["value"], 0.5, 1e-12);
}

#[test]
fn unknown_state_spec_exits_2() {
    let out = udg(&[
        "convolve", "--kind", "free", "--lhs", "bogus", "--rhs", "counit", "-n", "2", "u11",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus"));
}

#[test]
fn parse_error_reports_position() {
    let out = udg(&["eval", "--trace", "free", "-n", "2", "u11 u31"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("byte 4"));
}

#[test]
fn counterexamples_have_witnesses() {
    for kind in ["boolean", "monotone", "free"] {
        let r = json(&["counterexample", "--kind", kind, "-n", "2"]);
        assert!(r["residual_max"].as_f64().unwrap() >= 0.25, "{kind}: {r}");
        assert!(r["witness"]["word"].is_string(), "{kind}: {r}");
        assert!(r["identity"].is_string());
    }
}

#[test]
fn nc_counts_and_complement() {
    let r = json(&["nc", "-m", "6"]);
    assert_eq!(r["count"], 132);
    assert_eq!(r["catalan"], 132);
    let r = json(&["nc", "--sigma", "1,3|5", "--complement-of", "2,4,6"]);
    assert_eq!(r["complement"], "{2}{4,6}");
}

#[test]
fn mc_blocks_json_is_byte_identical() {
    let args = [
        "--json",
        "mc-blocks",
        "--word",
        "u11 u11*",
        "-n",
        "2",
        "-N",
        "16",
        "--samples",
        "40",
    ];
    let a = udg(&args);
    let mut threaded = vec!["--threads", "3"];
    threaded.extend_from_slice(&args);
    let b = udg(&threaded);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let r: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(r["seed"], 42);
    assert!(r["sigmas"].as_f64().unwrap() < 5.0);
}

#[test]
fn seed_changes_mc_output() {
    let a = json(&["mc-blocks", "--word", "u11 u11*", "-N", "8", "--samples", "20"]);
    let b = json(&[
        "--seed",
        "7",
        "mc-blocks",
        "--word",
        "u11 u11*",
        "-N",
        "8",
        "--samples",
        "20",
    ]);
    assert_ne!(a["mean"], b["mean"]);
    assert_eq!(b["seed"], 7);
}

#[test]
fn mc_bm_against_free_bm() {
    let r = json(&[
        "mc-bm",
        "--word",
        "u11 u22",
        "-n",
        "2",
        "-N",
        "16",
        "--samples",
        "50",
        "--t",
        "0.5",
        "--steps",
        "20",
    ]);
    assert_value(&r["exact"], (-0.25f64).exp().powi(2), 1e-12);
    assert!(r["sigmas"].as_f64().unwrap() < 5.0);
}

#[test]
fn csv_sweep_writes_one_row_per_size() {
    let dir = std::env::temp_dir().join(format!("udg-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("sweep.csv");
    let out = udg(&[
        "--csv",
        path.to_str().unwrap(),
        "mc-blocks",
        "--word",
        "u12 u12*",
        "--samples",
        "10",
        "--sweep",
        "4,8,12",
    ]);
    assert!(out.status.success());
    let mut rdr = csv::Reader::from_path(&path).unwrap();
    let headers = rdr.headers().unwrap().clone();
    assert!(headers.iter().any(|h| h == "mean.re"));
    let sizes: Vec<String> = rdr.records().map(|r| r.unwrap()[0].to_string()).collect();
    assert_eq!(sizes, ["4", "8", "12"]);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn generator_bm_k3() {
    let r = json(&["generator", "--triple", "bm", "-k", "3", "--samples", "50", "-N", "32"]);
    assert_eq!(r["recursion"].as_f64().unwrap(), -4.5);
    assert_eq!(r["closed_form_derivative"].as_f64().unwrap(), -4.5);
    assert_eq!(r["finite_difference"]["pass"], true);
}

#[test]
fn triple_check_fixture() {
    let r = json(&["triple-check", "--file", &fixture("triple_n2_d1.json")]);
    assert_eq!(r["pass"], true);
    assert!(r["axioms"]["max_violation"].as_f64().unwrap() <= 1e-9);
    let out = udg(&["triple-check", "--file", &fixture("triple_bad_w.json")]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn selftest_quick_passes() {
    let out = udg(&["selftest", "--level", "quick"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{text}");
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 10, "{text}");
}

#[test]
fn selftest_catalan_fault_exits_1() {
    let out = udg(&["selftest", "--level", "quick", "--inject-fault", "catalan"]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.lines().any(|l| l.starts_with("FAIL  1")), "{text}");
}
