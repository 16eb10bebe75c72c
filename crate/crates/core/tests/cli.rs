use std::f64::consts::{FRAC_PI_2, PI};
use std::process::{Command, Output};

use basicgap::report::validate_report_json;

fn basicgap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_basicgap")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 output")
}

fn csv_column(text: &str, name: &str) -> Vec<f64> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let idx = header.iter().position(|h| *h == name).unwrap_or_else(|| panic!("no column {name} in {header:?}"));
    lines.map(|l| l.split(',').nth(idx).unwrap().parse().unwrap()).collect()
}

#[test]
fn exit_codes() {
    assert_eq!(basicgap(&["bounds", "--n", "3", "--K", "1", "--d", "1.5"]).status.code(), Some(0));
    assert_eq!(basicgap(&["bounds", "--K", "1", "--d", "4.0"]).status.code(), Some(2));
    assert_eq!(basicgap(&["bounds", "--n", "1"]).status.code(), Some(2));
    assert_eq!(basicgap(&["bounds", "--tolerance", "1e-2"]).status.code(), Some(2));
    assert_eq!(basicgap(&["sweep", "--sweep", "d=1:2:0"]).status.code(), Some(2));
    assert_eq!(basicgap(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(basicgap(&["verify", "--negative-control"]).status.code(), Some(1));
}

#[test]
fn verify_passes_and_is_deterministic() {
    let args = ["verify", "--format", "json", "--seed", "7"];
    let a = basicgap(&args);
    let b = basicgap(&args);
    assert_eq!(a.status.code(), Some(0), "{}", stdout(&a));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    validate_report_json(&v).unwrap();
    let suites = v["suite_results"].as_array().unwrap();
    assert!(suites.len() >= 9);
    assert!(suites.iter().all(|s| s["passed"] == true));
}

#[test]
fn negative_control_names_the_failing_suite() {
    let o = basicgap(&["verify", "--negative-control", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    validate_report_json(&v).unwrap();
    let failing: Vec<_> = v["suite_results"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|s| s["passed"] == false)
        .map(|s| s["name"].as_str().unwrap().to_owned())
        .collect();
    assert_eq!(failing, ["psi_ode_residual"]);
}

#[test]
fn json_outputs_match_the_schema() {
    for args in [
        &["bounds", "--model", "--format", "json"][..],
        &["model", "--n", "5", "--K", "1", "--d", "2", "--a", "-0.5", "--format", "json"],
        &["examples", "--format", "json"],
        &["sweep", "--sweep", "K=0:1:3", "--model", "--format", "json"],
        &["bounds", "--s", "0.3", "--timing", "--format", "json"],
    ] {
        let o = basicgap(args);
        assert_eq!(o.status.code(), Some(0), "{args:?}");
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        validate_report_json(&v).unwrap_or_else(|e| panic!("{args:?}: {e}"));
    }
}

#[test]
fn bounds_are_sorted_with_model_on_top() {
    let o = basicgap(&["bounds", "--n", "3", "--K", "1", "--d", &FRAC_PI_2.to_string(), "--model", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let recs = v["records"].as_array().unwrap();
    assert_eq!(recs[0]["bound"], "model");
    let values: Vec<f64> = recs.iter().map(|r| r["value"].as_f64().unwrap()).collect();
    assert!(values.windows(2).all(|w| w[0] >= w[1]));
    let opt = recs.iter().find(|r| r["bound"] == "shi_zhang_optimal").unwrap();
    assert!((opt["value"].as_f64().unwrap() - 5.0625).abs() < 1e-10);
}

#[test]
fn s_sweep_peaks_at_the_closed_form() {
    let o = basicgap(&["sweep", "--n", "3", "--K", "1", "--d", &FRAC_PI_2.to_string(), "--sweep", "s=0.0125:0.9925:99"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(!text.contains('\r'));
    let col = csv_column(&text, "shi_zhang");
    assert_eq!(col.len(), 99);
    let peak = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    assert!((peak - 5.0625).abs() < 1e-6, "peak {peak}");
}

#[test]
fn curvature_sweep_raises_the_model() {
    let o = basicgap(&["sweep", "--n", "4", "--d", "1.2", "--sweep", "K=0:1:6", "--model"]);
    let model = csv_column(&stdout(&o), "model");
    assert_eq!(model.len(), 6);
    assert!(model.windows(2).all(|w| w[1] >= w[0]), "{model:?}");
}

#[test]
fn flat_diameter_sweep_is_pi_squared_over_d_squared() {
    let o = basicgap(&["sweep", "--K", "0", "--sweep", "d=0.5:3:6"]);
    let text = stdout(&o);
    let ds = csv_column(&text, "d");
    let zy = csv_column(&text, "zhong_yang");
    for (d, z) in ds.iter().zip(&zy) {
        let exact = PI * PI / (d * d);
        assert!(((z - exact) / exact).abs() < 1e-10);
    }
}

#[test]
fn two_variable_sweep_has_full_grid() {
    let o = basicgap(&["sweep", "--sweep", "n=2:4:3", "--sweep", "d=0.5:1.5:2"]);
    let text = stdout(&o);
    assert!(text.starts_with("n,d,"));
    assert_eq!(text.lines().count(), 1 + 6);
}

#[test]
fn out_flag_writes_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let o = basicgap(&["examples", "--format", "json", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    validate_report_json(&v).unwrap();
    assert!(!v["records"].as_array().unwrap().is_empty());
}

#[test]
fn table_output_is_readable() {
    let o = basicgap(&["examples"]);
    let text = stdout(&o);
    assert!(text.contains("hopf"));
    assert!(text.lines().count() > 10);
}
