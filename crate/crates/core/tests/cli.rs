use std::path::Path;
use std::process::{Command, Output};

use formspace::exterior_poly::PolyFormJson;
use formspace::gmt::HodgeTupleJson;
use formspace::{PolyForm, Subspace};
use serde_json::Value;
use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_formspace"))
        .args(args)
        .env_remove("FORMSPACE_MAX_DIM")
        .env_remove("FORMSPACE_THREADS")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn write(dir: &TempDir, name: &str, body: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_owned()
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_owned()
}

fn read_json(p: impl AsRef<Path>) -> Value {
    serde_json::from_slice(&std::fs::read(p).unwrap()).unwrap()
}

fn form(v: &Value) -> PolyForm {
    let json: PolyFormJson = serde_json::from_value(v.clone()).unwrap();
    PolyForm::from_json(&json).unwrap()
}

const MT_ELEMENT: &str = r#"{"m":3,"k":1,"terms":[
    {"coeff":"1","exps":[1,0,0],"blade":[]},
    {"coeff":"1","exps":[0,1,0],"blade":[1,2]}]}"#;

#[test]
fn dims_hodge_with_rank() {
    let out = run(&["dims", "--m", "3", "--k", "1", "--s", "1", "--both"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let row = text.lines().nth(1).unwrap();
    assert_eq!(
        row.split('\t').collect::<Vec<_>>(),
        ["H^1_1", "3", "1", "5", "5", "match"]
    );
}

#[test]
fn dims_graded_and_single() {
    let out = run(&[
        "dims", "--m", "4", "--k", "1", "--r", "0", "--p", "0", "--q", "2",
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(
        stdout(&out).lines().nth(1).unwrap().split('\t').nth(3),
        Some("24")
    );
    let out = run(&["dims", "--m", "4", "--k", "0", "--s", "2"]);
    assert_eq!(
        stdout(&out).lines().nth(1).unwrap().split('\t').nth(3),
        Some("6")
    );
}

#[test]
fn dims_rejects_bad_parameters() {
    assert_eq!(code(&run(&["dims", "--m", "3", "--k", "1", "--s", "4"])), 2);
    assert_eq!(
        code(&run(&[
            "dims", "--m", "3", "--k", "1", "--r", "1", "--p", "0", "--q", "2"
        ])),
        2
    );
    assert_eq!(code(&run(&["dims", "--m", "3"])), 2);
    assert_eq!(code(&run(&["no-such-command"])), 2);
}

#[test]
fn basis_files_are_canonical_and_stable() {
    let dir = TempDir::new().unwrap();
    let a = path(&dir, "a.json");
    let b = path(&dir, "b.json");
    for p in [&a, &b] {
        let out = run(&[
            "basis", "--space", "hodge", "--m", "3", "--k", "1", "--s", "1", "--out", p,
        ]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let json: formspace::exact_linalg::SubspaceJson =
        serde_json::from_slice(&std::fs::read(&a).unwrap()).unwrap();
    assert_eq!(Subspace::from_json(&json).unwrap().dim(), 5);
}

#[test]
fn basis_space_kinds() {
    let w = run(&["basis", "--space", "W", "--m", "4", "--k", "1", "--s", "2"]);
    assert_eq!(code(&w), 0);
    let v: Value = serde_json::from_str(&stdout(&w)).unwrap();
    assert_eq!(v["dim"], 0);

    let mt = run(&[
        "basis", "--space", "mt", "--m", "3", "--k", "0", "--r", "0", "--p", "0", "--q", "1",
    ]);
    let v: Value = serde_json::from_str(&stdout(&mt)).unwrap();
    assert_eq!(v["dim"], 4);

    let kd = run(&[
        "basis", "--space", "kerdelta", "--m", "4", "--k", "2", "--s", "2",
    ]);
    let v: Value = serde_json::from_str(&stdout(&kd)).unwrap();
    assert_eq!(v["dim"], 54);

    assert_eq!(
        code(&run(&[
            "basis", "--space", "bogus", "--m", "3", "--k", "1", "--s", "1"
        ])),
        2
    );
}

#[test]
fn dimension_cap_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_formspace"))
        .args([
            "basis", "--space", "hodge", "--m", "3", "--k", "2", "--s", "1",
        ])
        .env("FORMSPACE_MAX_DIM", "5")
        .output()
        .unwrap();
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("exceeds cap"));
    let out = run(&[
        "--max-dim",
        "5",
        "basis",
        "--space",
        "hodge",
        "--m",
        "3",
        "--k",
        "2",
        "--s",
        "1",
    ]);
    assert_eq!(code(&out), 1);
}

#[test]
fn split_hand_example() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "f.json", MT_ELEMENT);
    let out_path = path(&dir, "split.json");
    let out = run(&[
        "split", "--input", &input, "--r", "0", "--p", "0", "--q", "1", "--out", &out_path,
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v = read_json(&out_path);
    let image = &v["image_part"]["components"][0];
    assert_eq!(
        image["terms"],
        serde_json::json!([{"coeff":"1","exps":[0,0,0],"blade":[1]}])
    );
    let k0 = form(&v["kernel_part"][0]);
    let k2 = form(&v["kernel_part"][1]);
    assert!(k0.is_zero());
    assert_eq!(k2.term_count(), 2);
}

/// split, then lift the image and add the kernel parts back
#[test]
fn split_then_lift_reassembles() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "f.json", MT_ELEMENT);
    let split_path = path(&dir, "split.json");
    let out = run(&[
        "split",
        "--input",
        &input,
        "--r",
        "0",
        "--p",
        "0",
        "--q",
        "1",
        "--out",
        &split_path,
    ]);
    assert_eq!(code(&out), 0);
    let split = read_json(&split_path);
    let tuple = write(&dir, "t.json", &split["image_part"].to_string());
    let lifted_path = path(&dir, "lifted.json");
    let out = run(&["lift", "--input", &tuple, "--out", &lifted_path]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let mut total = form(&read_json(&lifted_path));
    for part in split["kernel_part"].as_array().unwrap() {
        total = total.add(&form(part)).unwrap();
    }
    let original: PolyFormJson = serde_json::from_str(MT_ELEMENT).unwrap();
    assert_eq!(
        total.to_json(),
        PolyForm::from_json(&original).unwrap().to_json()
    );
}

#[test]
fn lift_of_zero_tuple_is_zero() {
    let dir = TempDir::new().unwrap();
    let zero = HodgeTupleJson {
        m: 3,
        k: 1,
        range: formspace::GradeRange::new(3, 0, 0, 1).unwrap(),
        components: vec![PolyForm::zero(3, 0).to_json()],
    };
    let input = write(&dir, "z.json", &serde_json::to_string(&zero).unwrap());
    let out = run(&["lift", "--input", &input]);
    assert_eq!(code(&out), 0);
    assert!(form(&serde_json::from_str(&stdout(&out)).unwrap()).is_zero());
}

#[test]
fn precondition_failures_exit_one() {
    let dir = TempDir::new().unwrap();
    let not_mt = write(
        &dir,
        "g.json",
        r#"{"m":3,"k":1,"terms":[{"coeff":"1","exps":[1,0,0],"blade":[]}]}"#,
    );
    let out = run(&[
        "split", "--input", &not_mt, "--r", "0", "--p", "0", "--q", "1",
    ]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("NotInMT"));

    // x1 dx1 is closed but not coclosed
    let bad = r#"{"m":3,"k":2,"range":{"r":0,"p":0,"q":1},"components":[
        {"m":3,"k":1,"terms":[{"coeff":"1","exps":[1,0,0],"blade":[1]}]}]}"#;
    let tuple = write(&dir, "t.json", bad);
    let out = run(&["lift", "--input", &tuple]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("ComponentNotHodge"));

    let garbage = write(&dir, "x.json", "{not json");
    assert_eq!(code(&run(&["lift", "--input", &garbage])), 2);
}

#[test]
fn apply_d_twice_vanishes() {
    let dir = TempDir::new().unwrap();
    let input = write(
        &dir,
        "f.json",
        r#"{"m":3,"k":3,"terms":[{"coeff":"2/3","exps":[1,2,0],"blade":[3]},{"coeff":"-5","exps":[0,1,2],"blade":[1]}]}"#,
    );
    let once = path(&dir, "once.json");
    assert_eq!(
        code(&run(&[
            "apply", "--op", "d", "--input", &input, "--out", &once
        ])),
        0
    );
    assert!(!form(&read_json(&once)).is_zero());
    let out = run(&["apply", "--op", "d", "--input", &once]);
    assert_eq!(code(&out), 0);
    assert!(form(&serde_json::from_str(&stdout(&out)).unwrap()).is_zero());
}

#[test]
fn operator_export() {
    let out = run(&["operator", "--op", "d", "--m", "2", "--k", "1", "--s", "0"]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["triplets"], serde_json::json!([[0, 0, "1"], [1, 1, "1"]]));
}

#[test]
fn verify_small_hodge_grid() {
    let dir = TempDir::new().unwrap();
    let csv = path(&dir, "r.csv");
    let out = run(&[
        "verify", "--suite", "hodge", "--m-max", "3", "--k-max", "2", "--out", &csv,
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("check_id,m,k,s,r,p,q,j,computed,expected,status")
    );
    let rows: Vec<&str> = lines.collect();
    // m = 2 has 3 grades, m = 3 has 4, each over k = 0..2
    assert_eq!(rows.len(), (3 + 4) * 3);
    assert!(rows
        .iter()
        .all(|r| r.starts_with("HODGE_DIM,") && r.ends_with(",pass")));
}

#[test]
fn verify_json_report_and_bad_suite() {
    let out = run(&[
        "verify",
        "--suite",
        "mt,monogenic",
        "--m-max",
        "3",
        "--k-max",
        "1",
        "--format",
        "json",
    ]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["summary"]["failed"], 0);
    assert_eq!(v["summary"]["total"], v["summary"]["passed"]);
    assert_eq!(code(&run(&["verify", "--suite", "nosuch"])), 2);
    assert_eq!(
        code(&run(&[
            "verify", "--suite", "hodge", "--m-min", "4", "--m-max", "3"
        ])),
        2
    );
}

#[test]
fn verify_reports_are_reproducible() {
    let args = [
        "verify",
        "--suite",
        "lift,poincare",
        "--m-max",
        "3",
        "--k-max",
        "2",
        "--cases",
        "10",
        "--seed",
        "99",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}
