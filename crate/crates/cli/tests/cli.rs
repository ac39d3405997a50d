use serde_json::Value;
use std::process::Command;

fn run(args: &[&str]) -> (i32, Value, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_berkcrucial")).args(args).output().unwrap();
    let stdout = String::from_utf8(out.stdout).unwrap();
    let stderr = String::from_utf8(out.stderr).unwrap();
    let body = serde_json::from_str(&stdout).or_else(|_| serde_json::from_str(&stderr)).unwrap_or(Value::Null);
    (out.status.code().unwrap(), body, stdout)
}

fn gauss() -> Value {
    serde_json::json!({"type": "II", "center": "0", "t": "0"})
}

#[test]
fn minresloc_of_the_square_map() {
    let (code, v, _) = run(&["minresloc", "--p", "5", "--map", "z^2"]);
    assert_eq!(code, 0);
    assert_eq!(v["locus"], Value::Array(vec![gauss()]));
    assert_eq!(v["min"], "0");
    assert_eq!(v["potentially_good"], true);
}

#[test]
fn ordres_both_routes() {
    let (code, v, _) = run(&["ordres", "--p", "5", "--map", "z^2", "--at", "0;-1"]);
    assert_eq!(code, 0);
    assert_eq!(v["direct"], "2");
    assert_eq!(v["formula"], "2");
    assert_eq!(v["equal"], true);
}

#[test]
fn weights_sum_to_degree_minus_one() {
    let (code, v, _) = run(&["weights", "--p", "3", "--map", "z^2+z"]);
    assert_eq!(code, 0);
    assert_eq!(v["total"], "1");
    assert_eq!(v["matches_formula"], true);
}

#[test]
fn scaled_square_locus() {
    let (code, v, _) = run(&["goodred", "--p", "5", "--map", "p*z^2"]);
    assert_eq!(code, 0);
    assert_eq!(v["locus"][0]["t"], "-1");
    assert_eq!(v["potentially_good"], true);
}

#[test]
fn crucial_tree_dot() {
    let (code, _, out) = run(&["crucialtree", "--p", "5", "--map", "z^2+1/5"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("graph tree {"));
    assert!(out.contains("w=1"));
}

#[test]
fn equidist_csv() {
    let (code, _, out) = run(&["equidist", "--p", "5", "--map", "z^2+1/5", "--n", "2", "--format", "csv"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "n,phi,lhs,rhs,margin");
    assert_eq!(lines.len(), 7);
}

#[test]
fn output_is_deterministic() {
    let a = run(&["crucialtree", "--p", "3", "--map", "(z^3 - z)/3", "--format", "json"]).2;
    let b = run(&["crucialtree", "--p", "3", "--map", "(z^3 - z)/3", "--format", "json"]).2;
    assert_eq!(a, b);
}

#[test]
fn selftest_reports_seed() {
    let (code, v, _) = run(&["selftest", "--seed", "11", "--trials", "4"]);
    assert_eq!(code, 0);
    assert_eq!(v["seed"], 11);
    assert_eq!(v["passed"], true);
}

#[test]
fn residue_extension_exit_code() {
    let (code, v, _) = run(&["minresloc", "--p", "3", "--map", "z^3 + z"]);
    assert_eq!(code, 2);
    assert_eq!(v["error"], "UnsupportedResidueExtension");
    assert_eq!(v["input"]["map"], "z^3 + z");
}

#[test]
fn input_errors_exit_one() {
    assert_eq!(run(&["minresloc", "--p", "4", "--map", "z^2"]).0, 1);
    assert_eq!(run(&["minresloc", "--p", "5", "--map", "z^"]).0, 1);
    assert_eq!(run(&["ordres", "--p", "5", "--map", "z^2", "--at", "inf"]).0, 1);
    assert_eq!(run(&["minresloc", "--p", "5", "--map", "z + 1"]).0, 1);
    assert_eq!(run(&["minresloc", "--p", "5", "--map", "3"]).0, 1);
    assert_eq!(run(&["bogus"]).0, 1);
}
