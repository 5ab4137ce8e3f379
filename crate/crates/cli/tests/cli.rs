use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mcf-lab")).args(args).env_remove("MCF_SEED").output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut a = args.to_vec();
    a.push("--json");
    let o = run(&a);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_str(&stdout(&o)).unwrap()
}

fn without_timings(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("timings");
    v
}

#[test]
fn list_catalogue() {
    let o = run(&["list"]);
    assert!(o.status.success());
    let v = json(&["list"]);
    assert_eq!(v["schema"], "mcf-lab/1");
    let rec = |name: &str| v["records"].as_array().unwrap().iter().find(|r| r["inputs"]["system"] == name).unwrap().clone();
    assert_eq!(rec("gs")["estimates"]["is_full"], true);
    assert_eq!(rec("brun")["estimates"]["is_full"], false);
    assert_eq!(rec("brun-mult")["estimates"]["intertwiner"], "none");
}

#[test]
fn expand_examples() {
    assert_eq!(stdout(&run(&["expand", "--system", "gauss", "--x", "0.4", "--steps", "2"])), "2 2\n");
    assert_eq!(stdout(&run(&["expand", "--system", "gs", "--n", "2", "--x", "0.6,0.3", "--steps", "1"])), "1\n");
    let o = run(&["expand", "--system", "gs", "--x", "0.6,0.3", "--steps", "0"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "");
    let v = json(&["expand", "--system", "poincare", "--x", "0.7,0.2", "--steps", "1"]);
    assert_eq!(v["records"][0]["estimates"]["digits"][0], "(12)");
}

#[test]
fn exit_codes() {
    let code = |args: &[&str]| run(args).status.code().unwrap();
    assert_eq!(code(&["expand", "--system", "gs", "--x", "0.3,0.6", "--steps", "1"]), 2);
    assert_eq!(code(&["expand", "--system", "gs", "--x", "0.5,0", "--steps", "1"]), 3);
    assert_eq!(code(&["measure", "--system", "brun", "--kind", "total", "--samples", "1000"]), 4);
    assert_eq!(code(&["measure", "--system", "selmer-full", "--digits", "2,0", "--samples", "1000"]), 5);
    assert_eq!(code(&["symmetry", "--system", "poincare", "--digits", "e,e", "--samples", "1000"]), 6);
    assert_eq!(code(&["frobnicate"]), 64);
    assert_eq!(code(&["expand", "--system", "gs", "--x", "0.5"]), 64);
    assert_eq!(code(&["measure", "--system", "gs", "--digits", "x"]), 64);
    assert_eq!(code(&["--help"]), 0);
}

#[test]
fn poincare_asymmetry_is_reported_not_fatal() {
    let o = run(&["symmetry", "--system", "poincare", "--n", "2", "--digits", "(12),(123)"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("violated"));
}

#[test]
fn battery_records_divergent_cylinders() {
    let v = json(&["symmetry", "--system", "poincare", "--over", "e,(13)", "--length", "2", "--samples", "20000"]);
    let recs = v["records"].as_array().unwrap();
    assert_eq!(recs.len(), 4);
    assert_eq!(recs[0]["inputs"]["digits"], "e,e");
    assert_eq!(recs[0]["verdict"], "divergent");
    assert!(recs[1]["estimates"]["z"].is_number());
}

#[test]
fn reports_are_deterministic() {
    let args = ["symmetry", "--system", "gs", "--digits", "0,1", "--samples", "50000"];
    let a = without_timings(json(&args));
    let b = without_timings(json(&args));
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    let c = without_timings(json(&["symmetry", "--system", "gs", "--digits", "0,1", "--samples", "50000", "--seed", "7"]));
    assert_ne!(a["records"], c["records"]);
    let env = Command::new(env!("CARGO_BIN_EXE_mcf-lab"))
        .args(["symmetry", "--system", "gs", "--digits", "0,1", "--samples", "50000", "--json"])
        .env("MCF_SEED", "7")
        .output()
        .unwrap();
    let env: Value = serde_json::from_slice(&env.stdout).unwrap();
    assert_eq!(env["seed"], 7);
    assert_eq!(env["records"], c["records"]);
}

#[test]
fn dual_check_selmer() {
    let o = run(&["dual-check", "--system", "selmer", "--n", "3", "--cell-samples", "2000"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("verdict: pass"), "{out}");
    let v = json(&["dual-check", "--system", "poincare", "--n", "2", "--digits", "(12),(123)", "--cell-samples", "500"]);
    let recs = v["records"].as_array().unwrap();
    assert_eq!(recs[0]["estimates"]["commutes"], false);
    assert_eq!(recs[1]["estimates"]["commutes"], true);
    assert_eq!(recs[2]["verdict"], "fail");
    assert_eq!(run(&["dual-check", "--system", "brun-mult"]).status.code(), Some(1));
}

#[test]
fn dual_search_outcomes() {
    let v = json(&["dual-search", "--system", "gs", "--n", "2", "--bound", "1", "--cell-samples", "300"]);
    let best = &v["records"][0]["estimates"]["candidates"][0]["matrix"];
    assert_eq!(best, &serde_json::json!([[1, 1, 0], [1, 0, 0], [0, 0, 1]]));
    let v = json(&["dual-search", "--system", "poincare", "--n", "2", "--bound", "1"]);
    assert_eq!(v["records"][0]["verdict"], "exhausted");
}

#[test]
fn telephone_counts() {
    let o = run(&["telephone", "--max", "6"]);
    assert!(o.status.success());
    assert!(stdout(&o).ends_with("1,2,4,10,26,76\n"));
}

#[test]
fn figure_and_csv_files() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("p.svg");
    let csv = dir.path().join("p.csv");
    let o = run(&[
        "figure",
        "--system",
        "poincare",
        "--n",
        "2",
        "--svg-out",
        svg.to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&svg).unwrap();
    for label in ["e", "(12)", "(23)", "(123)", "(13)", "(132)"] {
        assert!(text.contains(&format!("data-label=\"{label}\"")), "{label}");
    }
    let rows = std::fs::read_to_string(&csv).unwrap();
    assert!(rows.starts_with("claim,"));
    assert!(rows.lines().nth(1).unwrap().starts_with("figure,"));
    assert_eq!(run(&["figure", "--system", "gs", "--n", "3"]).status.code(), Some(64));
    // without --svg-out the SVG goes to stdout
    assert!(stdout(&run(&["figure", "--system", "gs"])).starts_with("<?xml"));
}
