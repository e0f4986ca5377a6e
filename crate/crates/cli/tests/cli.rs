use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn invspan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_invspan")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("bad JSON ({e}): {}", String::from_utf8_lossy(&out.stdout)))
}

fn assert_schema(command: &str, value: &Value) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas").join(format!("{command}.schema.json"));
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = validator.iter_errors(value).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{command}: {errors:?}");
}

#[test]
fn verify_span_ell_2() {
    let out = invspan(&["verify-span", "--ell", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["w_dim"], 10);
    assert_eq!(v["full"], true);
    assert_eq!(v["status"], "certified");
}

#[test]
fn character_n_4() {
    let v = json(&invspan(&["character", "--n", "4"]));
    assert_eq!(v["v1"].as_f64(), Some(1.0));
    assert_eq!(v["v2"].as_f64(), Some(-1.0));
}

#[test]
fn usage_errors_exit_2() {
    let out = invspan(&["verify-span", "--ell", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());

    let out = invspan(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));

    assert_eq!(invspan(&["decompose", "--n", "3"]).status.code(), Some(2));
    assert_eq!(invspan(&["test-theorem2", "--n", "50", "--permutations", "99"]).status.code(), Some(2));
    assert_eq!(invspan(&["orbit-walk", "--alpha", "1.5"]).status.code(), Some(2));
}

#[test]
fn bad_thread_count_is_usage_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_invspan"))
        .args(["character"])
        .env("INVSPAN_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn vanishing_degree_is_degenerate() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.txt");
    std::fs::write(&spec, "# ell C\n0 1.0\n1 0.5\n").unwrap();
    let out = invspan(&["test-theorem2", "--ell", "2", "--n", "200", "--permutations", "99", "--spectrum", spec.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn malformed_spectrum_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.txt");
    std::fs::write(&spec, "0 1.0\n0 2.0\n").unwrap();
    let out = invspan(&["spectrum-estimate", "--lmax", "2", "--spectrum", spec.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let runs: [&[&str]; 3] = [
        &["simulate-field", "--lmax", "4", "--n", "3", "--radial", "lognormal", "--seed", "11"],
        &["test-theorem2", "--ell", "2", "--n", "200", "--permutations", "199", "--seed", "12"],
        &["orbit-walk", "--ell", "2", "--n", "200", "--permutations", "99", "--format", "csv", "--seed", "13"],
    ];
    for (k, args) in runs.iter().enumerate() {
        let mut files = Vec::new();
        for (rep, threads) in ["1", "0"].iter().enumerate() {
            let path = dir.path().join(format!("{k}-{rep}.out"));
            let status = Command::new(env!("CARGO_BIN_EXE_invspan"))
                .args(*args)
                .args(["--out", path.to_str().unwrap()])
                .env("INVSPAN_THREADS", threads)
                .status()
                .unwrap();
            assert!(status.code().is_some_and(|c| c <= 1), "{args:?}");
            files.push(std::fs::read(&path).unwrap());
        }
        assert!(!files[0].is_empty());
        assert_eq!(files[0], files[1], "{args:?}");
    }
}

#[test]
fn every_command_matches_its_schema() {
    let cases: [(&str, &[&str]); 10] = [
        ("verify-span", &["--ell", "3"]),
        ("decompose", &["--n", "6"]),
        ("character", &["--n", "5"]),
        ("block-check", &["--n", "6"]),
        ("simulate-field", &["--lmax", "3", "--n", "2"]),
        ("spectrum-estimate", &["--lmax", "3", "--n", "300"]),
        ("test-theorem2", &["--ell", "2", "--n", "200", "--permutations", "99"]),
        ("test-bernstein", &["--n", "300", "--permutations", "99"]),
        ("orbit-walk", &["--ell", "1", "--n", "300", "--permutations", "99", "--odd-permutation"]),
        ("calibrate", &["--reps", "4", "--n", "100", "--permutations", "99"]),
    ];
    for (command, args) in cases {
        let mut argv = vec![command];
        argv.extend_from_slice(args);
        let out = invspan(&argv);
        assert!(out.status.code().is_some_and(|c| c <= 1), "{command}: {}", String::from_utf8_lossy(&out.stderr));
        assert_schema(command, &json(&out));
    }
}

#[test]
fn csv_outputs() {
    let out = invspan(&["simulate-field", "--lmax", "2", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("ell,m,value\n"));
    assert_eq!(text.lines().count(), 1 + 9);

    let out = invspan(&["orbit-walk", "--ell", "1", "--n", "150", "--permutations", "99", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("x1,x2,x3\n"));
    assert_eq!(text.lines().count(), 151);

    let out = invspan(&["spectrum-estimate", "--lmax", "2", "--n", "100", "--format", "csv"]);
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("ell,estimate,input,std_error\n"));
}

#[test]
fn theorem2_sample_passes() {
    let out = invspan(&["test-theorem2", "--ell", "3", "--n", "600", "--radial", "constant", "--permutations", "199"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["tests"].as_array().unwrap().len(), 3);
}
