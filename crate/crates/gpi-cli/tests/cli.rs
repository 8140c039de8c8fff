//! End-to-end tests of the `gpi` binary: exit codes, JSON shapes, golden
//! outputs, and byte-level determinism.

use std::process::Command;

use serde_json::{json, Value};

fn gpi(args: &[&str]) -> (i32, Value, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_gpi"))
        .args(args)
        .output()
        .expect("binary runs");
    let stdout = String::from_utf8(out.stdout).expect("utf8");
    let value: Value = serde_json::from_str(stdout.trim()).unwrap_or_else(|e| {
        panic!("stdout is not a single JSON document ({e}): {stdout:?}")
    });
    (out.status.code().unwrap_or(-1), value, stdout)
}

fn run_lib(args: &[&str]) -> (i32, String) {
    let argv: Vec<String> = args.iter().map(|s| s.to_string()).collect();
    let mut buf = Vec::new();
    let code = gpi_cli::run_command(&argv, &mut buf);
    (code, String::from_utf8(buf).unwrap())
}

#[test]
fn classify_golden_output() {
    let (code, v, _) = gpi(&["classify", "--n", "14", "--p", "3"]);
    assert_eq!(code, 0);
    assert_eq!(v, json!({"case": "I", "l": 0, "k": 14}));
    let (code, v, _) = gpi(&["classify", "--n", "6", "--p", "5"]);
    assert_eq!(code, 0);
    assert_eq!(v, json!({"case": "II", "l": 0, "m": 1}));
    let (code, v, _) = gpi(&["classify", "--n", "18", "--p", "3"]);
    assert_eq!(code, 0);
    assert_eq!(v, json!({"case": "II", "l": 2, "m": 0}));
}

#[test]
fn check_gpi_violation_exits_one_with_witness() {
    let (code, v, _) = gpi(&[
        "check-gpi",
        "--algebra",
        "matrix:2,3",
        "--expr",
        "X1*X2-X2*X1",
    ]);
    assert_eq!(code, 1);
    assert_eq!(v["holds"], json!(false));
    assert!(v["witness"].is_array());
    assert_eq!(v["checked"], json!(6561));
}

#[test]
fn check_gpi_hold_exits_zero() {
    let (code, v, _) = gpi(&["check-gpi", "--algebra", "field:3", "--expr", "X^3-X"]);
    assert_eq!(code, 0);
    assert_eq!(v["holds"], json!(true));
    assert_eq!(v["checked"], json!(3));
}

#[test]
fn solve_fi_contains_golden_solution() {
    let (code, v, _) = gpi(&[
        "solve-fi",
        "--algebra",
        "field:5",
        "--template",
        "power",
        "--n",
        "6",
        "--contains",
        "id,id",
    ]);
    assert_eq!(code, 0);
    assert_eq!(v["contains"], json!(true));
    assert_eq!(v["dimension"], json!(1));

    // A pair outside the space exits 1.
    let (code, v, _) = gpi(&[
        "solve-fi",
        "--algebra",
        "field:5",
        "--template",
        "power",
        "--n",
        "6",
        "--contains",
        "id,zero",
    ]);
    assert_eq!(code, 1);
    assert_eq!(v["contains"], json!(false));
}

#[test]
fn usage_errors_exit_two() {
    let (code, v, _) = gpi(&["bogus"]);
    assert_eq!(code, 2);
    assert!(v["error"].is_string());
    let (code, _, _) = gpi(&["classify", "--n", "14"]);
    assert_eq!(code, 2);
    let (code, _, _) = gpi(&["classify", "--n", "5", "--p", "3"]);
    assert_eq!(code, 2, "residual-condition violations are input errors");
    let (code, _, _) = gpi(&["check-gpi", "--algebra", "field:3", "--expr", "X^"]);
    assert_eq!(code, 2);
}

#[test]
fn identical_invocations_are_byte_identical() {
    let args = [
        "check-gpi",
        "--algebra",
        "matrix:2,3",
        "--expr",
        "X1*X2-X2*X1",
        "--mode",
        "sampled",
        "--seed",
        "11",
    ];
    let (_, _, first) = gpi(&args);
    let (_, _, second) = gpi(&args);
    assert_eq!(first, second);
    let (c1, s1) = run_lib(&args);
    let (c2, s2) = run_lib(&args);
    assert_eq!(c1, c2);
    assert_eq!(s1, s2);
    assert_eq!(s1, first, "library path and binary path agree");
}

#[test]
fn algebra_descriptor_round_trip_via_file() {
    let dir = std::env::temp_dir().join("gpi-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("m2f3.json");
    let path_str = path.to_str().unwrap();

    let (code, v, _) = gpi(&["algebra", "--algebra", "matrix:2,3", "--units", "--out", path_str]);
    assert_eq!(code, 0);
    assert_eq!(v["p"], json!(3));
    assert_eq!(v["dim"], json!(4));
    assert_eq!(v["units"], json!(48));
    assert_eq!(v["center_dim"], json!(1));
    assert_eq!(v["commutative"], json!(false));

    // The written descriptor loads back and computes the same things.
    let (code, v2, _) = gpi(&["algebra", "--algebra", path_str, "--units"]);
    assert_eq!(code, 0);
    assert_eq!(v2["units"], json!(48));
    assert_eq!(v2["basis"], v["basis"]);

    // And it still supports structure-aware maps.
    let (code, v3, _) = gpi(&["decompose", "--algebra", path_str, "--map", "transpose"]);
    assert_eq!(code, 0);
    assert_eq!(v3["count"], json!(4));
}

#[test]
fn check_fi_examples() {
    let (code, v, _) = gpi(&[
        "check-fi", "--algebra", "field:5", "--n", "6", "--f", "id", "--g", "id",
    ]);
    assert_eq!(code, 0);
    assert_eq!(v["holds"], json!(true));

    let (code, v, _) = gpi(&[
        "check-fi", "--algebra", "field:3,2", "--n", "12", "--f", "id", "--g", "frob",
    ]);
    assert_eq!(code, 0);
    assert_eq!(v["checked"], json!(8));

    let (code, v, _) = gpi(&[
        "check-fi", "--algebra", "field:5", "--n", "6", "--f", "id", "--g", "zero",
    ]);
    assert_eq!(code, 1);
    assert_eq!(v["witness"], json!([[1]]));
}

#[test]
fn template_file_matches_builtin() {
    let dir = std::env::temp_dir().join("gpi-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("power6.json");
    std::fs::write(
        &path,
        r#"{"unknowns": 2, "domain": "units",
           "terms": [{"L": "1", "slot": 0, "arg": "x", "R": "1"},
                     {"L": "-x^6", "slot": 1, "arg": "xinv", "R": "1"}],
           "rhs": "0"}"#,
    )
    .unwrap();
    let (code, via_file, _) = gpi(&[
        "solve-fi", "--algebra", "field:5", "--template-file", path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let (_, via_builtin, _) =
        gpi(&["solve-fi", "--algebra", "field:5", "--template", "power", "--n", "6"]);
    assert_eq!(via_file, via_builtin);
}

#[test]
fn poly_q_value_subcommand() {
    let (code, v, _) = gpi(&[
        "poly-q", "--p", "3", "--l", "1", "--m", "1", "--algebra", "matrix:2,3", "--at",
        "e11;e12",
    ]);
    assert_eq!(code, 0);
    assert_eq!(v["degree"], json!(9));
    assert_eq!(v["value"], json!([0, 2, 0, 0]), "Q(e11, e12) = 2 e12");
}

#[test]
fn units_generate_cases() {
    let (code, v, _) = gpi(&["units-generate", "--algebra", "matrix:2,3"]);
    assert_eq!(code, 0);
    assert_eq!(v["generates"], json!(true));
    let (code, v, _) = gpi(&["units-generate", "--algebra", "field:3,2"]);
    assert_eq!(code, 0);
    assert_eq!(v["generates"], json!(true));
}

#[test]
fn linearize_and_homog_round_trip() {
    let (code, v, _) = gpi(&[
        "linearize", "--algebra", "matrix:2,3", "--expr", "e11*X*e12*X", "--t", "2",
    ]);
    assert_eq!(code, 0);
    assert_eq!(v["degree"], json!(2));
    let text = v["text"].as_str().unwrap();
    assert!(text.contains("X1") && text.contains("X2"));

    let (code, v, _) = gpi(&[
        "homog", "--algebra", "matrix:2,3", "--expr", "e11*X^2*e12 + 2*X + e21", "--degree", "0",
    ]);
    assert_eq!(code, 0);
    assert_eq!(v["text"], json!("e21"));

    let (code, v, _) = gpi(&[
        "is-zero-formal", "--algebra", "matrix:2,3", "--expr", "2*X - X - X",
    ]);
    assert_eq!(code, 0);
    assert_eq!(v["zero"], json!(true));
    assert_eq!(v["degree"], Value::Null);
}
