use std::process::Command;

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_laurent-ritt"));
    c.env_remove("LAURENT_RITT_MAX_DEGREE");
    c
}

fn run(args: &[&str]) -> (i32, Value) {
    let out = bin().args(args).output().unwrap();
    let stdout = String::from_utf8(out.stdout).unwrap();
    let v: Value = serde_json::from_str(&stdout).unwrap_or_else(|e| panic!("{e}: {stdout}"));
    assert_eq!(v["version"], 1, "{stdout}");
    (out.status.code().unwrap(), v)
}

fn run_text(args: &[&str]) -> (i32, String) {
    let out = bin()
        .args(["--format", "text"])
        .args(args)
        .output()
        .unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
    )
}

#[test]
fn eval_dickson_composition() {
    let (code, v) = run(&["eval", "D(2) @ (x+1/x)"]);
    assert_eq!(code, 0);
    assert_eq!(v["text"], "x^2 + x^-2");
    assert_eq!(
        run_text(&["eval", "D(2) @ (x+1/x)"]),
        (0, "x^2 + x^-2\n".into())
    );
}

#[test]
fn decompose_all_chains_dihedral() {
    let (code, v) = run(&["decompose", "x^4 + x^-4", "--all-chains"]);
    assert_eq!(code, 0);
    assert_eq!(v["count"], 7);
    assert_eq!(v["chains"].as_array().unwrap().len(), 7);
    let (code, v) = run(&["decompose", "x^4 + x^-4"]);
    assert_eq!(code, 0);
    assert_eq!(v["chains"].as_array().unwrap().len(), 1);
    assert_eq!(v["chains"][0]["complete"], true);
}

#[test]
fn decompose_needs_laurent_input() {
    let (code, v) = run(&["decompose", "1/(x^2 + x^-2)"]);
    assert_eq!(code, 1);
    assert_eq!(v["error"]["kind"], "input");
    let (code, _) = run(&["decompose", "7"]);
    assert_eq!(code, 1);
}

#[test]
fn indecomposable_with_witness() {
    let (code, v) = run(&["indecomposable", "x^2 + 2*x + 1/x - 1/(4*x^2)"]);
    assert_eq!(code, 0);
    assert_eq!(v["indecomposable"], true);
    let (code, v) = run(&["indecomposable", "x^6 + x^-6"]);
    assert_eq!(code, 0);
    assert_eq!(v["indecomposable"], false);
    let w = &v["witness"]["text"];
    let (_, back) = run(&[
        "eval",
        &format!(
            "({}) @ ({})",
            w[0].as_str().unwrap(),
            w[1].as_str().unwrap()
        ),
    ]);
    assert_eq!(back["text"], "x^6 + x^-6");
}

#[test]
fn classify_quadratic_case() {
    let (code, v) = run(&[
        "classify", "--g1", "x^2", "--h1", "x - 1/x", "--g2", "x^2 - 4", "--h2", "x + 1/x",
    ]);
    assert_eq!(code, 0);
    assert_eq!(v["case"], "Lbidec.2");
}

#[test]
fn classify_rejects_non_bidecomposition() {
    let (code, v) = run(&[
        "classify", "--g1", "x^2", "--h1", "x + 1/x", "--g2", "x^2", "--h2", "x - 1/x",
    ]);
    assert_eq!(code, 1);
    assert_eq!(v["error"]["kind"], "precondition");
}

#[test]
fn connect_dihedral_six() {
    let (code, v) = run(&[
        "connect",
        "--chain1",
        "D(2); D(3); x + 1/x",
        "--chain2",
        "x + 1/x; x^3; x^2",
    ]);
    assert_eq!(code, 0, "{v}");
    let n = v["length"].as_u64().unwrap();
    assert_eq!(v["decs"].as_array().unwrap().len() as u64, n);
    assert_eq!(v["moves"].as_array().unwrap().len() as u64, n - 1);
}

#[test]
fn connect_rejects_incomplete_chain() {
    let (code, v) = run(&[
        "connect",
        "--chain1",
        "D(6); x + 1/x",
        "--chain2",
        "x + 1/x; x^6",
    ]);
    assert_eq!(code, 1);
    assert_eq!(v["error"]["kind"], "precondition");
}

#[test]
fn dickson_outputs() {
    let (code, v) = run(&["dickson", "3"]);
    assert_eq!(code, 0);
    assert_eq!(v["text"], "x^3 - 3*x");
    let (_, v) = run(&["dickson", "3", "--alpha", "2"]);
    assert_eq!(v["text"], "x^3 - 6*x");
    let (_, v) = run(&["dickson", "3", "--second"]);
    assert_eq!(v["text"], "x^3 - 2*x");
    let (code, v) = run(&["dickson", "5", "--plus-factors"]);
    assert_eq!(code, 0);
    assert_eq!(v["product_verified"], true);
    assert_eq!(v["quadratics"].as_array().unwrap().len(), 2);
    assert!(!v["linear"].is_null());
}

#[test]
fn parse_errors_exit_one() {
    let (code, v) = run(&["eval", "x + * 2"]);
    assert_eq!(code, 1);
    assert_eq!(v["error"]["kind"], "parse");
    let (code, v) = run(&["eval", "zeta(2, 3)"]);
    assert_eq!(code, 1);
    assert_eq!(v["error"]["kind"], "arity");
    let out = bin().args(["eval"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn limits_exit_three() {
    let (code, v) = run(&["--max-degree", "10", "decompose", "x^12 + x^-12"]);
    assert_eq!(code, 3);
    assert_eq!(v["error"]["kind"], "limit");
}

#[test]
fn env_overrides_config_and_flags_override_env() {
    let out = bin()
        .env("LAURENT_RITT_MAX_DEGREE", "4")
        .args(["eval", "x^6"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let out = bin()
        .env("LAURENT_RITT_MAX_DEGREE", "4")
        .args(["--max-degree", "8", "eval", "x^6"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"max_degree": 4, "format": "text"}"#).unwrap();
    let out = bin()
        .args(["--config", cfg.to_str().unwrap(), "eval", "x^3"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "x^3\n");
    let out = bin()
        .env("LAURENT_RITT_MAX_DEGREE", "2")
        .args(["--config", cfg.to_str().unwrap(), "eval", "x^3"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn selftest_quick_passes() {
    let (code, v) = run(&["selftest"]);
    assert_eq!(code, 0);
    assert_eq!(v["ok"], true);
}

#[test]
fn printed_decompositions_parse_back() {
    // Each printed factor list is a valid '@' expression that evaluates to the input.
    for f in [
        "x^4 + x^-4",
        "x^6 + x^-6",
        "(x^2/3 - 1)^3 @ (x^2 + 2*x + 1/x - 1/(4*x^2))",
    ] {
        let (_, v) = run(&["decompose", f, "--all-chains"]);
        let (_, target) = run(&["eval", f]);
        for line in v["text"].as_array().unwrap() {
            let (_, back) = run(&["eval", line.as_str().unwrap()]);
            assert_eq!(back["text"], target["text"], "{line}");
        }
    }
}
