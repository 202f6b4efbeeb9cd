//! End-to-end checks of the command-line interface.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_mrci")
}

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/toy.csv")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("spawn mrci")
}

#[test]
fn missing_input_exits_with_io_code() {
    let out = run(&["mrci", "/nonexistent/file.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn malformed_input_exits_with_data_code() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(
        &path,
        "subject,trial,choice,a_prizes,a_probs,b_prizes,b_probs\ns1,1,1,10,0.5;0.5,20,1\n",
    )
    .unwrap();
    let out = run(&["mrci", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2"), "stderr: {err}");
}

#[test]
fn mrci_on_toy_fixture_reports_golden_value() {
    let fixture = fixture();
    let out = run(&["mrci", fixture.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let subject = &v.as_array().unwrap()[0];
    assert_eq!(subject["subject"], "s1");
    assert!((subject["mrci"].as_f64().unwrap() - 37.0 / 49.0).abs() < 1e-12);
    assert_eq!(subject["certified"], true);
}

#[test]
fn csv_format_emits_a_table() {
    let fixture = fixture();
    let out = run(&["--format", "csv", "mrci", fixture.to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.split(',').any(|c| c == "mrci"), "header: {header}");
    assert_eq!(lines.count(), 1);
}

#[test]
fn report_writes_all_artifacts() {
    let fixture = fixture();
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "--out",
        dir.path().to_str().unwrap(),
        "--permutations",
        "50",
        "report",
        fixture.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["report.json", "report.csv", "coverage.csv", "gains.csv", "stability.csv", "pvalues.csv"] {
        let path = dir.path().join(name);
        assert!(path.is_file(), "missing {name}");
        assert!(std::fs::metadata(&path).unwrap().len() > 0, "empty {name}");
    }
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["subjects"][0]["numerator"], 37);
}

#[test]
fn simulate_output_round_trips_through_the_parser() {
    let fixture = fixture();
    let dir = tempfile::tempdir().unwrap();
    let sim_path = dir.path().join("sim.csv");
    let out = run(&[
        "simulate",
        fixture.to_str().unwrap(),
        "--weights",
        "MAP:0.8,A1:0.1,A2:0.1",
        "--subjects",
        "2",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    std::fs::write(&sim_path, &out.stdout).unwrap();
    let parsed = mrci::parse_generic_csv(&sim_path).unwrap();
    assert_eq!(parsed.len(), 2);
    assert_eq!(parsed[0].len(), 7);
}
