use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name).display().to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_postselect")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

#[test]
fn analyze_example1() {
    let v = json(&run(&["analyze", "--in", &data("example1.json")]));
    assert!((v["e_s"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-12);
    assert_eq!(v["case"], "C1");
    assert_eq!(v["support"], "Equal");
    assert!(v["tolerances"]["rank_tol"].is_number());
}

#[test]
fn max_acceptance_qubit_pair() {
    let v = json(&run(&["max-acceptance", "--in", &data("q_example.json")]));
    let s7 = 7f64.sqrt();
    let want = 0.25 * (14.0 + 4.0 * s7) / (12.0 + 4.0 * s7);
    assert!((v["a_sigma_max"].as_f64().unwrap() - want).abs() < 1e-12);
    assert_eq!(format!("{:.3}", v["a_sigma_max"].as_f64().unwrap()), "0.272");
    assert!(v["for_sigma"]["achieving_measurement"]["lambda_rho"].is_array());
}

#[test]
fn check_reports_membership() {
    let v = json(&run(&["check", "--in", &data("example1.json"), "--measurement", &data("example1_measurement.json")]));
    assert!((v["error"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-12);
    assert_eq!(v["membership"]["member"], true);
    assert!((v["a_sigma"].as_f64().unwrap() - 0.125).abs() < 1e-15);
}

#[test]
fn all_reject_is_undefined() {
    let out = run(&["check", "--in", &data("example1.json"), "--measurement", &data("all_reject.json")]);
    assert_eq!(out.status.code(), Some(3));
    assert!(out.stdout.is_empty());
}

#[test]
fn construct_matches_stored_measurement() {
    let built = json(&run(&["construct", "--in", &data("example1.json"), "--params", &data("example1_params.json")]));
    let stored: Value =
        serde_json::from_str(&std::fs::read_to_string(data("example1_measurement.json")).unwrap()).unwrap();
    assert_eq!(built, stored);
}

#[test]
fn validation_errors_exit_2() {
    let dir = std::env::temp_dir().join(format!("postselect-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.json");
    std::fs::write(&bad, "{\"dim\": 2,\n \"rho\": [").unwrap();
    let out = run(&["analyze", "--in", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    let not_psd = dir.join("not_psd.json");
    std::fs::write(&not_psd, r#"{"dim":1,"rho":[[[-1.0,0.0]]],"sigma":[[[1.0,0.0]]],"p_rho":0.5}"#).unwrap();
    let out = run(&["analyze", "--in", not_psd.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("positive semidefinite"));

    let out = run(&["analyze", "--in", &data("example1.json"), "--tol-rank", "-1"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(run(&["analyze"]).status.code(), Some(2));
    assert_eq!(
        run(&["check", "--in", &data("q_example.json"), "--measurement", &data("all_reject.json")]).status.code(),
        Some(2)
    );
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn simulate_is_seeded() {
    let args = [
        "simulate",
        "--in",
        &data("example1.json"),
        "--measurement",
        &data("example1_measurement.json"),
        "--n",
        "20000",
    ];
    let a = run(&[&args[..], &["--seed", "42"]].concat());
    let b = run(&[&args[..], &["--seed", "42"]].concat());
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert_eq!(v["n"], 20000);
    let e = v["e_hat"].as_f64().unwrap();
    assert!((e - 1.0 / 3.0).abs() <= 3.0 * v["ci95"]["e"].as_f64().unwrap());
}

#[test]
fn oracle_and_lemmas() {
    let v = json(&run(&["oracle", "--in", &data("q_example.json"), "--trials", "100"]));
    let reports = v.as_array().unwrap();
    assert_eq!(reports.len(), 3);
    for r in reports {
        assert!(r["worst_violation"].as_f64().unwrap() <= 1e-8);
    }
    let v = json(&run(&["verify-lemmas", "--dim", "3", "--trials", "10", "--seed", "5"]));
    assert_eq!(v.as_array().unwrap().len(), 8);
    assert!(v.as_array().unwrap().iter().all(|r| r["passed"] == true));
    let v = json(&run(&["verify-lemmas", "--lemma", "singlemin", "--trials", "5"]));
    assert_eq!(v[0]["lemma"], "SingleMin");
    assert_eq!(run(&["verify-lemmas", "--lemma", "Nope"]).status.code(), Some(2));
}

#[test]
fn examples_are_byte_identical() {
    let a = run(&["examples"]);
    let b = run(&["examples"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(String::from_utf8(a.stdout).unwrap(), postselect::examples::golden_report().unwrap());
}

#[test]
fn out_flag_writes_file() {
    let path = std::env::temp_dir().join(format!("postselect-out-{}.json", std::process::id()));
    let out = run(&["analyze", "--in", &data("example1.json"), "--pretty", "--out", path.to_str().unwrap()]);
    assert!(out.status.success() && out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.contains("\n  \"case\": \"C1\""));
    std::fs::remove_file(&path).unwrap();
}
