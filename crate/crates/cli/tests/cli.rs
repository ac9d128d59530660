use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::{json, Value};
use tempfile::TempDir;
use tripc_core::suite::SuiteReport;
use tripc_core::tripotent::Tripotent;
use tripc_core::tro::TroSpace;
use tripc_core::CMatrix;

fn run(args: &[&str]) -> (i32, Value) {
    run_env(args, &[])
}

fn run_env(args: &[&str], env: &[(&str, &str)]) -> (i32, Value) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_tripc"));
    cmd.args(args).env_remove("TRIPC_TOL_EQ");
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("run tripc");
    let code = out.status.code().expect("exit code");
    let doc = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (code, doc)
}

fn write(dir: &TempDir, name: &str, v: &Value) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, serde_json::to_string(v).unwrap()).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn real(rows: usize, cols: usize, data: &[f64]) -> Value {
    json!({
        "rows": rows,
        "cols": cols,
        "data": data.iter().map(|&x| [x, 0.0]).collect::<Vec<_>>(),
    })
}

fn diagonal_space() -> Value {
    json!({
        "p": 2, "q": 2, "square_mode": true,
        "basis": [real(2, 2, &[1.0, 0.0, 0.0, 0.0]), real(2, 2, &[0.0, 0.0, 0.0, 1.0])],
    })
}

fn scalars() -> Value {
    json!({"p": 1, "q": 1, "square_mode": true, "basis": [real(1, 1, &[1.0])]})
}

#[test]
fn range_of_diag_three_zero() {
    let dir = TempDir::new().unwrap();
    let z = write(&dir, "z.json", &diagonal_space());
    let x = write(&dir, "x.json", &real(2, 2, &[3.0, 0.0, 0.0, 0.0]));
    let (code, doc) = run(&["range", "--space", s(&z), "--x", s(&x)]);
    assert_eq!(code, 0);
    let t: Tripotent = serde_json::from_value(doc).unwrap();
    assert_eq!(t.matrix(), &CMatrix::diag_real(&[1.0, 0.0]));
}

#[test]
fn opposite_signs_have_no_supremum() {
    let dir = TempDir::new().unwrap();
    let z = write(&dir, "z.json", &scalars());
    let u = write(&dir, "u.json", &real(1, 1, &[1.0]));
    let v = write(&dir, "v.json", &real(1, 1, &[-1.0]));
    let (code, doc) = run(&["sup-exists", "--space", s(&z), "--u", s(&u), "--v", s(&v)]);
    assert_eq!((code, &doc["verdict"]), (1, &json!(false)));
    let (code, doc) = run(&["sup", "--space", s(&z), "--u", s(&u), "--v", s(&v)]);
    assert_eq!((code, &doc["verdict"]), (1, &json!(false)));
    let (code, _) = run(&["sup-exists", "--space", s(&z), "--u", s(&u), "--v", s(&u)]);
    assert_eq!(code, 0);
}

#[test]
fn verify_order_equiv_default_run() {
    let (code, doc) = run(&[
        "verify", "--suite", "order-equiv", "--trials", "500", "--dim-max", "4", "--seed", "7",
    ]);
    assert_eq!(code, 0);
    assert_eq!(doc["passed"], 500);
    assert_eq!(doc["failed"], 0);
    let report: SuiteReport = serde_json::from_value(doc).unwrap();
    assert!(report.ok());
}

#[test]
fn usage_and_input_errors_exit_two() {
    assert_eq!(run(&["no-such-command"]).0, 2);
    assert_eq!(run(&["range"]).0, 2);
    let (code, doc) = run(&["verify", "--suite", "nope"]);
    assert_eq!((code, doc["error"].as_str()), (2, Some("UnknownSuite")));
    assert_eq!(run(&["verify", "--suite", "order-equiv", "--trials", "0"]).0, 2);
    assert_eq!(run(&["verify", "--suite", "order-equiv", "--dim-max", "9"]).0, 2);
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{not json").unwrap();
    assert_eq!(run(&["j-alg", "--space", s(&bad)]).0, 2);
}

#[test]
fn tolerance_env_var_is_read_and_flag_wins() {
    let dir = TempDir::new().unwrap();
    let z = write(&dir, "z.json", &diagonal_space());
    let x = write(&dir, "x.json", &real(2, 2, &[1.0, 0.0, 0.0, 0.0]));
    let args = ["contains", "--space", s(&z), "--x", s(&x)];
    assert_eq!(run_env(&args, &[("TRIPC_TOL_EQ", "-1")]).0, 2);
    let mut with_flag = args.to_vec();
    with_flag.extend(["--tol-eq", "1e-9"]);
    assert_eq!(run_env(&with_flag, &[("TRIPC_TOL_EQ", "-1")]).0, 0);
}

#[test]
fn outputs_reparse_and_chain() {
    let dir = TempDir::new().unwrap();
    let (code, doc) = run(&["gen-tro", "--seed", "11", "--dim-max", "3"]);
    assert_eq!(code, 0);
    let z: TroSpace = serde_json::from_value(doc.clone()).unwrap();
    assert_eq!(serde_json::to_value(&z).unwrap(), doc);
    let zp = write(&dir, "z.json", &doc);

    let (code, j) = run(&["j-alg", "--space", s(&zp)]);
    if z.square_mode() {
        assert_eq!(code, 0);
        serde_json::from_value::<TroSpace>(j).unwrap();
    } else {
        assert_eq!((code, j["error"].as_str()), (2, Some("NotSquareAmbient")));
    }

    let x = write(&dir, "x.json", &serde_json::to_value(&z.basis()[0]).unwrap());
    let (code, r) = run(&["range", "--space", s(&zp), "--x", s(&x)]);
    assert_eq!(code, 0);
    let t: Tripotent = serde_json::from_value(r.clone()).unwrap();
    assert_eq!(serde_json::to_value(&t).unwrap(), r);
    let tp = write(&dir, "t.json", &r);

    let (code, doc) = run(&["leq", "--u", s(&tp), "--v", s(&tp)]);
    assert_eq!((code, &doc["verdict"]), (0, &json!(true)));
    let (code, doc) = run(&["peirce", "--u", s(&tp)]);
    assert_eq!((code, &doc["verdict"]), (0, &json!(true)));
    let (code, doc) = run(&["amplify", "--u", s(&tp), "--amplify", "2"]);
    assert_eq!(code, 0);
    let t2: Tripotent = serde_json::from_value(doc).unwrap();
    assert_eq!(t2.rank(), 2 * t.rank());
    let (code, doc) = run(&["hat", "--u", s(&tp)]);
    assert_eq!(code, 0);
    serde_json::from_value::<CMatrix>(doc["hat"].clone()).unwrap();
}

#[test]
fn offdiagonal_witness_through_cli() {
    let dir = TempDir::new().unwrap();
    let z = write(
        &dir,
        "z.json",
        &json!({
            "p": 2, "q": 2, "square_mode": true,
            "basis": [real(2, 2, &[0.0, 1.0, 0.0, 0.0]), real(2, 2, &[0.0, 0.0, 1.0, 0.0])],
        }),
    );
    let zero = write(&dir, "zero.json", &real(2, 2, &[0.0; 4]));
    let (code, j) = run(&["j-alg", "--space", s(&z)]);
    assert_eq!(code, 0);
    assert_eq!(j["basis"].as_array().unwrap().len(), 0);
    let (code, _) = run(&["central-max", "--space", s(&z), "--u", s(&zero)]);
    assert_eq!(code, 0);
    let (code, doc) = run(&["annihilator", "--space", s(&z), "--x", s(&zero)]);
    assert_eq!((code, &doc["dim"]), (0, &json!(2)));
    let (code, doc) = run(&["probe", "--space", s(&z), "--u", s(&zero)]);
    assert_eq!((code, &doc["verdict"]), (1, &json!(false)));
}

#[test]
fn tripotent_rejection_is_a_false_verdict() {
    let dir = TempDir::new().unwrap();
    let z = write(&dir, "z.json", &diagonal_space());
    let x = write(&dir, "x.json", &real(2, 2, &[0.5, 0.0, 0.0, 1.0]));
    let (code, doc) = run(&["tripotent", "--space", s(&z), "--x", s(&x)]);
    assert_eq!((code, &doc["verdict"]), (1, &json!(false)));
}

#[test]
fn fixture_negative_control_fails_with_witness() {
    let dir = TempDir::new().unwrap();
    let corrupted = json!({
        "space": diagonal_space(),
        "a": real(2, 2, &[1.0, 0.0, 0.0, 0.0]),
        "b": real(2, 2, &[-1.0, 0.0, 0.0, 1.0]),
    });
    let f = write(&dir, "f.json", &corrupted);
    let (code, doc) = run(&["verify", "--fixture", s(&f)]);
    assert_eq!(code, 1);
    assert_eq!(doc["failed"], 1);
    assert!(doc["failures"][0]["witness"].get("fixture").is_some());
}

#[test]
fn boundary_cone_and_bk_check_on_diagonal_matrices() {
    let dir = TempDir::new().unwrap();
    let d = |a: f64, b: f64| real(2, 2, &[a, 0.0, 0.0, b]);
    let x = json!({
        "p": 2, "q": 2, "square_mode": true,
        "space_basis": [d(1.0, 0.0), d(0.0, 1.0)],
        "cone_generators": [d(1.0, 0.0), d(0.0, 1.0)],
    });
    let xp = write(&dir, "x.json", &x);
    let (code, doc) = run(&["boundary-cone", "--x", s(&xp)]);
    assert_eq!(code, 0);
    let u: Tripotent = serde_json::from_value(doc["u"].clone()).unwrap();
    assert_eq!(u.matrix(), &CMatrix::identity(2));
    assert_eq!(run(&["bk-check", "--x", s(&xp)]).0, 0);
    assert_eq!(run(&["completeness", "--x", s(&xp)]).0, 0);
}
