use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::{json, Value};

fn field_json(p: Option<u64>) -> Value {
    match p {
        Some(p) => json!({"kind": "prime_field", "p": p}),
        None => json!({"kind": "rationals"}),
    }
}

fn matrix_json(p: Option<u64>, rows: &[&[i64]]) -> Value {
    let entries: Vec<Vec<String>> = rows.iter().map(|r| r.iter().map(|x| x.to_string()).collect()).collect();
    json!({"field": field_json(p), "rows": rows.len(), "cols": rows[0].len(), "entries": entries})
}

fn hyperplane_json(p: Option<u64>, normal: &[&[i64]]) -> Value {
    json!({"kind": "hyperplane", "n": normal.len(), "field": field_json(p), "normal": matrix_json(p, normal)})
}

fn write(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_vec_pretty(v).unwrap()).unwrap();
    path
}

fn run(args: &[&str]) -> (i32, Value, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_matfactor"))
        .args(args)
        .output()
        .unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    let value = serde_json::from_str(&text).unwrap_or(Value::Null);
    (out.status.code().unwrap(), value, text)
}

fn entries(v: &Value) -> Vec<Vec<i64>> {
    v["entries"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| {
            r.as_array()
                .unwrap()
                .iter()
                .map(|x| x.as_str().unwrap().parse().unwrap())
                .collect()
        })
        .collect()
}

fn mul(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = a.len();
    (0..n)
        .map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect())
        .collect()
}

#[test]
fn pair_mode_on_sl3_identity() {
    let dir = tempfile::tempdir().unwrap();
    let id: &[&[i64]] = &[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]];
    let h = write(dir.path(), "h.json", &hyperplane_json(None, id));
    let m = write(dir.path(), "m.json", &matrix_json(None, id));
    let (code, report, _) = run(&[
        "factor",
        "--mode",
        "pair",
        "--hyperplane",
        h.to_str().unwrap(),
        "--matrix",
        m.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert_eq!(report["outcome"], "success");
    let art = &report["artifacts"];
    assert_eq!(art["verified"], true);
    let product = mul(&entries(&art["B"]), &entries(&art["C"]));
    assert_eq!(product, vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]);
}

#[test]
fn classify2_h0() {
    let dir = tempfile::tempdir().unwrap();
    let h = write(dir.path(), "h.json", &hyperplane_json(Some(3), &[&[1, 0], &[0, 0]]));
    let (code, report, _) = run(&["classify2", "--hyperplane", h.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(report["artifacts"]["verdict"], "conjugate_H0");
}

#[test]
fn pair2_reports_the_obstruction() {
    let dir = tempfile::tempdir().unwrap();
    let h = write(dir.path(), "h.json", &hyperplane_json(Some(2), &[&[1, 0], &[0, 0]]));
    let m = write(dir.path(), "m.json", &matrix_json(Some(2), &[&[0, 1], &[1, 0]]));
    let (code, report, _) = run(&[
        "factor",
        "--mode",
        "pair2",
        "--hyperplane",
        h.to_str().unwrap(),
        "--matrix",
        m.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert_eq!(report["artifacts"]["outcome"], "impossible");
}

#[test]
fn semigroup_and_sumprod_modes() {
    let dir = tempfile::tempdir().unwrap();
    let normal: &[&[i64]] = &[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]];
    let h = write(dir.path(), "h.json", &hyperplane_json(Some(2), normal));
    let m = write(
        dir.path(),
        "m.json",
        &matrix_json(Some(2), &[&[1, 1, 0], &[0, 1, 0], &[0, 0, 1]]),
    );
    let (code, report, _) = run(&[
        "factor",
        "--mode",
        "semigroup",
        "--affine",
        h.to_str().unwrap(),
        "--matrix",
        m.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert_eq!(report["artifacts"]["verified"], true);
    assert_eq!(report["artifacts"]["length"], 2);
    let (code, report, _) = run(&[
        "factor",
        "--mode",
        "sumprod",
        "--subspace",
        h.to_str().unwrap(),
        "--matrix",
        m.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert_eq!(report["artifacts"]["verified"], true);
}

#[test]
fn verify_prod2_exhaustive_passes() {
    let (code, report, _) = run(&["verify", "--theorem", "prod2", "--n", "3", "--p", "2", "--exhaustive"]);
    assert_eq!(code, 0);
    assert_eq!(report["artifacts"]["passed"], true);
    assert_eq!(report["artifacts"]["instances"], 511);
}

#[test]
fn reports_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let h = write(
        dir.path(),
        "h.json",
        &hyperplane_json(Some(5), &[&[1, 2, 0], &[0, 3, 0], &[4, 0, 1]]),
    );
    let m = write(
        dir.path(),
        "m.json",
        &matrix_json(Some(5), &[&[2, 0, 1], &[1, 1, 0], &[0, 3, 4]]),
    );
    let args = [
        "factor",
        "--mode",
        "pair",
        "--hyperplane",
        h.to_str().unwrap(),
        "--matrix",
        m.to_str().unwrap(),
        "--seed",
        "7",
    ];
    let (c1, _, t1) = run(&args);
    let (c2, _, t2) = run(&args);
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(t1, t2);
}

#[test]
fn input_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "m.json", &matrix_json(None, &[&[1, 0], &[0, 1]]));
    let missing = dir.path().join("nope.json");
    let (code, report, _) = run(&[
        "factor",
        "--mode",
        "pair",
        "--hyperplane",
        missing.to_str().unwrap(),
        "--matrix",
        m.to_str().unwrap(),
    ]);
    assert_eq!(code, 2);
    assert_eq!(report["outcome"], "failure");
    let (code, _, _) = run(&["factor", "--mode", "semigroup", "--matrix", m.to_str().unwrap()]);
    assert_eq!(code, 2);
    // n = 2 is outside the pair-factorization theorem.
    let h = write(dir.path(), "h.json", &hyperplane_json(None, &[&[1, 0], &[0, 1]]));
    let (code, report, _) = run(&[
        "factor",
        "--mode",
        "pair",
        "--hyperplane",
        h.to_str().unwrap(),
        "--matrix",
        m.to_str().unwrap(),
    ]);
    assert_eq!(code, 2, "{report}");
}
