use std::path::PathBuf;

use ellcount::cli::{run, EXIT_CAP, EXIT_OK, EXIT_USAGE};

fn tmp(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("ellcount-cli-{}-{name}", std::process::id()))
}

fn run_to_string(args: &[&str]) -> (i32, String) {
    let out = tmp(&args.join("_").replace(['/', ','], "-"));
    let argv = std::iter::once("ellcount".to_string())
        .chain(args.iter().map(|s| s.to_string()))
        .chain(["--out".to_string(), out.display().to_string()]);
    let code = run(argv);
    let text = std::fs::read_to_string(&out).unwrap_or_default();
    let _ = std::fs::remove_file(&out);
    (code, text)
}

fn value_of(text: &str, key: &str) -> String {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .and_then(|rest| rest.split(" | ").next())
        .unwrap_or_else(|| panic!("no {key} in output"))
        .to_string()
}

#[test]
fn analyze_reports_reduction_data() {
    let (code, text) = run_to_string(&["analyze", "--curve", "-25,0"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(value_of(&text, "Delta_min"), "1000000");
    assert_eq!(value_of(&text, "conductor"), "800");
    assert_eq!(value_of(&text, "torsion"), "Z/2 x Z/2");
    assert!(text.contains("point,H,h,hhat,error"));
}

#[test]
fn constants_for_congruent_curve() {
    let (code, text) = run_to_string(&["constants", "--curve", "-1,0", "--p", "2"]);
    assert_eq!(code, EXIT_OK);
    let c: f64 = value_of(&text, "C").parse().unwrap();
    let cp: f64 = value_of(&text, "Cprime").parse().unwrap();
    assert!((c / 1.2703e18 - 1.0).abs() < 1e-4);
    assert!((cp / c - 3.426).abs() < 1e-3);
    for line in text.lines().filter(|l| l.contains(" = ") && l.contains(" | ")) {
        assert!(line.split(" | ").nth(1).is_some_and(|f| !f.trim().is_empty()), "{line}");
    }
}

#[test]
fn verify_small_run_passes() {
    let (code, text) = run_to_string(&["verify", "--curve", "-25,0", "--p", "2", "--bmax", "1000", "--grid", "5"]);
    assert_eq!(code, EXIT_OK);
    assert!(text.ends_with("all_verdicts = true\n"));
    assert!(!text.contains("FAIL"));
}

#[test]
fn count_csv_and_json_layouts() {
    let (code, csv) = run_to_string(&["count", "--curve", "-7,6", "--grid", "3"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(csv.lines().next(), Some("B,N,Nhat,ceilC,ceilCprime,verdictN,verdictNhat"));
    assert_eq!(csv.lines().count(), 4);
    let (code, json) = run_to_string(&["count", "--curve", "-7,6", "--grid", "3", "--format", "json"]);
    assert_eq!(code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["tables"][0]["rows"].as_array().unwrap().len(), 3);
    assert!(v["tables"][0]["constants"][0]["constants"].is_array());
}

#[test]
fn config_file_with_flag_override() {
    let cfg = tmp("config.txt");
    std::fs::write(&cfg, "curve = -1,0\ngrid = 2\nformat = json\n").unwrap();
    let (code, text) = run_to_string(&["count", "--config", cfg.to_str().unwrap(), "--grid", "4"]);
    let _ = std::fs::remove_file(&cfg);
    assert_eq!(code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["tables"][0]["rows"].as_array().unwrap().len(), 4);
}

#[test]
fn covering_needs_seed_and_is_reproducible() {
    assert_eq!(run_to_string(&["covering"]).0, EXIT_USAGE);
    let a = run_to_string(&["covering", "--seed", "5", "--format", "csv"]);
    let b = run_to_string(&["covering", "--seed", "5", "--format", "csv"]);
    assert_eq!(a.0, EXIT_OK);
    assert_eq!(a, b);
}

#[test]
fn lehmer_table() {
    let (code, text) = run_to_string(&["lehmer", "--grid", "3", "--bmax", "100", "--epsilon", "1"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(value_of(&text, "epsilon_threshold[eps=1]"), "3");
    assert_eq!(text.matches("lehmer_scaled").count(), 3);
}

#[test]
fn product_of_two_copies() {
    let (code, text) = run_to_string(&["product", "--curve", "-1,0", "--curve", "-1,0", "--grid", "3"]);
    assert_eq!(code, EXIT_OK);
    assert!(text.lines().skip(1).all(|l| l.split(',').nth(2) == Some("16")));
}

#[test]
fn failure_exit_codes() {
    assert_eq!(run_to_string(&["count", "--curve", "-1,0", "--grid", "2000000.0"]).0, EXIT_CAP);
    assert_eq!(run_to_string(&["count", "--curve", "-1,0", "--grid", "10.0"]).0, EXIT_USAGE);
    assert_eq!(run_to_string(&["constants", "--curve", "0,-2"]).0, EXIT_USAGE);
    assert_eq!(run_to_string(&["constants", "--curve", "0,-2", "--p", "4"]).0, EXIT_USAGE);
    assert_eq!(run_to_string(&["count", "--curve", "-1,0", "--workers", "0"]).0, EXIT_USAGE);
}
