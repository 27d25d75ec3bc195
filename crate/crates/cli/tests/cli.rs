use std::fs;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gstieltjes")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn seq_check_reports_pair_properties() {
    let o = run(&["seq", "check", "--a", "0,3", "--b", "1,2"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["weak_supermajorisation"], true);
    assert_eq!(v["pte_degree"], 1);
}

#[test]
fn figure_rho_pair_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig1.csv");
    let o = run(&["figure", "rho-pair", "--a", "0,4,5", "--b", "1,2,6", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(&path).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,rho1,rho2"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|c| c.parse().unwrap()).collect()).collect();
    assert!(rows.len() > 700);
    assert!(rows.iter().all(|r| r[2] >= 0.0));
    assert!(rows.iter().any(|r| r[1] < 0.0) && rows.iter().any(|r| r[1] > 0.0));

    // byte-for-byte deterministic
    let again = dir.path().join("again.csv");
    run(&["figure", "rho-pair", "--a", "0,4,5", "--b", "1,2,6", "--out", again.to_str().unwrap()]);
    assert_eq!(fs::read(&path).unwrap(), fs::read(&again).unwrap());
}

#[test]
fn rho_certify_and_emit() {
    let o = run(&["rho", "certify", "--a", "0,4,5", "--b", "1,2,6", "--ell", "1", "--at", "9/2"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["certificate"]["nonnegative"], false);
    assert_eq!(v["values"][0]["value"], "-1");
    let o = run(&["rho", "certify", "--a", "0,4,5", "--b", "1,2,6", "--ell", "2"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["certificate"]["nonnegative"], true);
    assert_eq!(v["vanishes_from"], "6");

    let o = run(&["rho", "emit", "--a", "0,3", "--b", "1,2", "--step", "1/2"]);
    let text = stdout(&o);
    assert!(text.starts_with("t,rho1\n"));
    assert_eq!(text.lines().count(), 1 + 11);
    assert!(text.contains("1.5000000000000000e0,1.0000000000000000e0"));
}

#[test]
fn phi_emit_with_model() {
    let o = run(&["phi", "emit", "--a", "0,3", "--b", "1,2", "--model", "reciprocal_gamma", "--t-max", "4", "--step", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("t,phi\n"));
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn pte_search_json() {
    let o = run(&["pte", "search", "--n", "3", "--max", "6", "--ell", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let list = v.as_array().unwrap();
    assert!(list.iter().any(|p| p["a"] == serde_json::json!(["0", "4", "5"]) && p["b"] == serde_json::json!(["1", "2", "6"])));
}

#[test]
fn verify_thm2_passes_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let o = run(&[
        "verify", "thm2", "--model", "reciprocal_gamma", "--a", "0,3", "--b", "1,2", "--grid", "1,2.5,10", "--tol", "1e-8",
        "--out", path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&path).unwrap();
    let report = gstieltjes::representations::VerificationReport::from_json(&text).unwrap();
    assert_eq!(report.schema, 1);
    assert!(report.pass);
    assert_eq!(report.rows.len(), 3);
}

#[test]
fn verify_variants() {
    let o = run(&["verify", "thm3", "--model", "multiple_gamma:3", "--a", "0,4,5", "--b", "1,2,6", "--ell", "2", "--grid", "1,2.5"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let o = run(&["verify", "barnes", "--n", "2", "--a", "0,3/2,3/2", "--b", "1/2,1/2,2", "--grid", "1,2.5", "--tol", "1e-6"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = run(&["verify", "vertical", "--model", "reciprocal_gamma", "--which", "cor32(1)", "--grid", "0.5,1,4", "--tol", "1e-6"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = run(&["verify", "vertical", "--model", "barnes_g", "--which", "cor35", "--a", "0,3", "--b", "1,2", "--grid", "1,2", "--tol", "1e-6"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = run(&["verify", "lemma24", "--model", "multiple_gamma:3", "--a", "0,4,5", "--b", "1,2,6", "--ell", "2", "--grid", "12,30", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("x,direct,oracle,laplace,stieltjes,expansion,max_rel_dev,pass\n"));
}

#[test]
fn custom_model_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    fs::write(&path, r#"{"genus": 1, "name": "lattice", "rule": "lambda=k, mult=1"}"#).unwrap();
    let o = run(&["verify", "thm2", "--model-file", path.to_str().unwrap(), "--a", "0,3", "--b", "1,2", "--grid", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    fs::write(&path, "{not json").unwrap();
    let o = run(&["verify", "thm2", "--model-file", path.to_str().unwrap(), "--a", "0,3", "--b", "1,2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn exit_codes() {
    // parse error
    assert_eq!(run(&["seq", "check", "--a", "0,x", "--b", "1,2"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "thm2", "--model", "nope", "--a", "0,3", "--b", "1,2"]).status.code(), Some(2));
    assert_eq!(run(&["bogus"]).status.code(), Some(2));
    // domain error
    assert_eq!(run(&["seq", "check", "--a", "0,3", "--b", "1"]).status.code(), Some(3));
    assert_eq!(run(&["verify", "thm2", "--model", "gamma", "--a", "0,3", "--b", "1,2", "--grid", "-1"]).status.code(), Some(3));
    // not applicable: the report is still written, exit 1
    let o = run(&["verify", "thm3", "--model", "gamma", "--a", "0,4,5", "--b", "1,2,6", "--ell", "2"]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["applicable"], false);
}
