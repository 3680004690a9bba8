//! End-to-end runs of the binary and of `run` in-process.

use std::process::Command;

use canonical_fock_cli::{literal, run, EXIT_DOMAIN, EXIT_FAILURE, EXIT_USAGE};
use proptest::prelude::*;
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_canonical-fock"))
}

fn ok_json(args: &[&str]) -> Value {
    let out = run(std::iter::once("canonical-fock").chain(args.iter().copied()));
    assert_eq!(out.code, 0, "{args:?}: {}", out.stderr);
    serde_json::from_str(&out.stdout).unwrap()
}

#[test]
fn classify_example() {
    let out = bin()
        .args(["classify", "--s", "2+0i", "--t", "1+0i"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "{\"class\":\"compact\",\"discriminant\":2.0}\n"
    );
}

#[test]
fn classify_all_regimes() {
    for (s, t, class) in [
        ("2", "1", "compact"),
        ("1.4142135623730951", "1", "unitary"),
        ("0.8", "0.5", "densely_defined_unbounded"),
        ("1", "2i", "kernel_not_in_f2"),
    ] {
        assert_eq!(ok_json(&["classify", "--s", s, "--t", t])["class"], class);
    }
}

#[test]
fn spectrum_example_csv() {
    let out = run([
        "canonical-fock",
        "spectrum",
        "--s",
        "2+0i",
        "--t",
        "1+0i",
        "--count",
        "5",
        "--dim",
        "64",
    ]);
    assert_eq!(out.code, 0);
    let lines: Vec<&str> = out.stdout.lines().collect();
    assert_eq!(lines[0], "n,closed,numeric,abs_err");
    assert_eq!(lines.len(), 6);
    let row: Vec<f64> = lines[1].split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(row[0], 0.0);
    assert!((row[1] - 0.786151).abs() < 5e-7);
    assert!((row[2] - row[1]).abs() < 1e-8);
}

#[test]
fn spectrum_json_has_report_fields() {
    let v = ok_json(&[
        "spectrum", "--s", "2+0i", "--t", "0+1i", "--format", "json", "--p", "1,2,inf",
    ]);
    assert_eq!(v["singular_values"].as_array().unwrap().len(), 8);
    for key in ["1", "2", "inf"] {
        assert!(v["schatten"][key]["closed"].is_f64(), "{key}");
    }
    assert!(v["trace"]["closed"].is_array());
}

#[test]
fn trace_example() {
    let v = ok_json(&["trace", "--s", "2+0i", "--t", "1+0i"]);
    assert_eq!(v["closed"][0].as_f64().unwrap(), 1.0);
    assert!((v["numeric"][0].as_f64().unwrap() - 1.0).abs() < 1e-10);
    assert_eq!(v["numeric"][1].as_f64().unwrap(), 0.0);
}

#[test]
fn berezin_with_norm() {
    let v = ok_json(&["berezin", "--s", "2", "--t", "0", "--p", "2"]);
    let closed = v["lp_norm"]["closed"].as_f64().unwrap();
    assert!((closed - 2.0 * std::f64::consts::PI / 3.0).abs() < 1e-12);
    let quad = v["lp_norm"]["quadrature"].as_f64().unwrap();
    assert!((quad - closed).abs() < 1e-6 * closed);
}

#[test]
fn kernel_reports_value_and_bound() {
    let v = ok_json(&[
        "kernel", "--s", "2", "--t", "1", "--z", "1+1i", "--w", "-1i",
    ]);
    assert!(v["modulus"].as_f64().unwrap() <= v["bound"].as_f64().unwrap());
}

#[test]
fn profile_csv_shape() {
    let out = run([
        "canonical-fock",
        "profile",
        "--s",
        "3",
        "--t",
        "1+1i",
        "--p",
        "inf",
    ]);
    assert_eq!(out.code, 0);
    let lines: Vec<&str> = out.stdout.lines().collect();
    assert_eq!(lines[0], "absw,arg,value");
    assert_eq!(lines.len(), 1 + 5 * 8);
}

#[test]
fn matrix_csv_and_json_agree() {
    let csv = run([
        "canonical-fock",
        "matrix",
        "--s",
        "2",
        "--t",
        "1",
        "--dim",
        "6",
    ]);
    let json = ok_json(&[
        "matrix", "--s", "2", "--t", "1", "--dim", "6", "--format", "json",
    ]);
    let entries = json["entries"].as_array().unwrap();
    let rows: Vec<&str> = csv.stdout.lines().skip(1).collect();
    assert_eq!(rows.len(), entries.len());
    for (row, e) in rows.iter().zip(entries) {
        // compare the emitted text: both use the shortest round-trip form
        let fields: Vec<&str> = row.split(',').collect();
        let from_json: Vec<String> = e.as_array().unwrap().iter().map(Value::to_string).collect();
        assert_eq!(fields, from_json);
        // parity: m + n even
        let m: u64 = fields[0].parse().unwrap();
        let n: u64 = fields[1].parse().unwrap();
        assert_eq!((m + n) % 2, 0);
    }
    assert_eq!(json["dim"], 6);
}

#[test]
fn domain_error_exits_2_with_one_json_line() {
    let out = bin()
        .args(["spectrum", "--s", "1+0i", "--t", "1+0i"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_DOMAIN));
    assert!(out.stdout.is_empty());
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().count(), 1);
    let v: Value = serde_json::from_str(&err).unwrap();
    assert_eq!(v["error"], "not_compact");
}

#[test]
fn usage_errors_exit_64() {
    for args in [
        vec!["classify", "--s", "2+x", "--t", "0"],
        vec!["classify", "--s", "0", "--t", "1"],
        vec!["matrix", "--s", "2", "--t", "1", "--dim", "257"],
        vec!["profile", "--s", "2", "--t", "1", "--p", "-1"],
        vec!["trace", "--s", "2", "--t", "1", "--format", "csv"],
        vec!["frobnicate"],
    ] {
        let out = bin().args(&args).output().unwrap();
        assert_eq!(out.status.code(), Some(EXIT_USAGE), "{args:?}");
    }
}

#[test]
fn verify_exit_codes() {
    let out = bin().args(["verify", "--suite", "fast"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["passed"], true);
    assert_eq!(v["seed"], 0x5EED);

    let out = bin()
        .args(["verify", "--inject-fault", "negate-conjugate-phase"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_FAILURE));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let failed: Vec<&str> = v["invariants"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| r["passed"] == false)
        .map(|r| r["name"].as_str().unwrap())
        .collect();
    assert_eq!(failed, ["kernel_conjugate_symmetry"]);
}

#[test]
fn out_flag_writes_file_and_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("spectrum.csv");
    let args = [
        "spectrum",
        "--s",
        "3",
        "--t",
        "1+1i",
        "--out",
        path.to_str().unwrap(),
    ];
    let out = bin().args(args).output().unwrap();
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let first = std::fs::read(&path).unwrap();
    bin().args(args).output().unwrap();
    assert_eq!(std::fs::read(&path).unwrap(), first);
    let piped = bin().args(&args[..5]).output().unwrap();
    assert_eq!(piped.stdout, first);
}

proptest! {
    #[test]
    fn literal_round_trips(re in any::<f64>(), im in any::<f64>()) {
        prop_assume!(re.is_finite() && im.is_finite());
        let z = canonical_fock::Complex::new(re, im);
        let back = literal::parse(&literal::render(z)).unwrap();
        prop_assert_eq!(back.re.to_bits(), re.to_bits());
        prop_assert_eq!(back.im.to_bits(), im.to_bits());
    }

    #[test]
    fn classify_accepts_any_rendered_pair(s in 0.1f64..5.0, t in -5.0f64..5.0) {
        let z = literal::render(canonical_fock::Complex::new(s, -t));
        let w = literal::render(canonical_fock::Complex::new(t, 0.0));
        let out = run(["canonical-fock", "classify", "--s", &z, "--t", &w]);
        prop_assert_eq!(out.code, 0);
    }
}
