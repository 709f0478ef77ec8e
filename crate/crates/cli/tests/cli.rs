//! End-to-end runs of the `minibus` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn repo() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn scenario(name: &str) -> String {
    repo().join("scenarios").join(format!("{name}.json")).display().to_string()
}

fn minibus(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_minibus")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Value printed after `label` on its own line.
fn field(text: &str, label: &str) -> f64 {
    let line = text.lines().find(|l| l.starts_with(label)).unwrap_or_else(|| panic!("no {label:?} in\n{text}"));
    line[label.len()..].trim().parse().unwrap()
}

fn write_variant(dir: &Path, edit: impl FnOnce(&mut serde_json::Value)) -> String {
    let mut v: serde_json::Value = serde_json::from_str(&fs::read_to_string(scenario("model1")).unwrap()).unwrap();
    edit(&mut v);
    let path = dir.join("variant.json");
    fs::write(&path, serde_json::to_string_pretty(&v).unwrap()).unwrap();
    path.display().to_string()
}

#[test]
fn analytic_reports_model1_indicator_and_bound() {
    let o = minibus(&["analytic", "--scenario", &scenario("model1")]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!((field(&text, "SI ") - 0.80).abs() <= 0.15);
    assert!((field(&text, "demand bound (pax/h)") - 88.0).abs() <= 0.3 * 88.0);
    assert!(text.contains("n_o = "));
}

#[test]
fn analytic_writes_json_when_asked() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().display().to_string();
    let o = minibus(&["analytic", "--scenario", &scenario("model2"), "--out", &out]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("model2_both_analytic.json")).unwrap()).unwrap();
    let si_p = v["parallel"]["selection_indicator"].as_f64().unwrap();
    assert!((si_p - 0.88).abs() <= 0.15);
}

#[test]
fn screen_ranks_by_indicator() {
    let list = ["model1", "model2", "cta126", "cta84"].map(scenario).join(",");
    let o = minibus(&["screen", "--scenario", &list]);
    assert!(o.status.success(), "{}", stderr(&o));
    let order: Vec<String> = stdout(&o)
        .lines()
        .skip(1)
        .map(|l| l.split_whitespace().nth(1).unwrap().to_string())
        .collect();
    assert_eq!(order, ["cta126", "model1", "cta84", "model2"]);
}

#[test]
fn unknown_verb_prints_usage_and_exits_1() {
    let o = minibus(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("Usage"));
}

#[test]
fn missing_service_object_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_variant(dir.path(), |v| {
        v.as_object_mut().unwrap().remove("service");
    });
    let o = minibus(&["analytic", "--scenario", &path]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("\"service\""), "{}", stderr(&o));
}

#[test]
fn zero_headway_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_variant(dir.path(), |v| {
        let svc = v["service"].as_object_mut().unwrap();
        svc.remove("headway_h");
        svc.insert("headway_min".into(), 0.into());
    });
    let o = minibus(&["simulate", "--scenario", &path, "--replications", "5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("non-positive parameter"), "{}", stderr(&o));
}

#[test]
fn missing_scenario_file_exits_1() {
    let o = minibus(&["analytic", "--scenario", "/nonexistent/model.json"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn unwritable_output_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let out = blocker.join("out").display().to_string();
    let o = minibus(&["simulate", "--scenario", &scenario("model1"), "--replications", "5", "--out", &out]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn simulate_output_is_byte_identical_across_runs() {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let out = d.path().display().to_string();
        let o = minibus(&["simulate", "--scenario", &scenario("model1"), "--replications", "50", "--seed", "11", "--out", &out]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let names = [
        "model1_both_report.json",
        "model1_both_table4.csv",
        "model1_amsod_delta_tc_histogram.csv",
        "model1_fixed_replications.csv",
        "model1_amsod_replications.csv",
    ];
    for n in names {
        let a = fs::read(dirs[0].path().join(n)).unwrap();
        let b = fs::read(dirs[1].path().join(n)).unwrap();
        assert_eq!(a, b, "{n} differs");
    }
    let table = fs::read_to_string(dirs[0].path().join("model1_both_table4.csv")).unwrap();
    assert_eq!(table.lines().count(), 10);
}

#[test]
fn json_format_writes_only_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().display().to_string();
    let o = minibus(&["simulate", "--scenario", &scenario("model1"), "--replications", "20", "--format", "json", "--out", &out]);
    assert!(o.status.success(), "{}", stderr(&o));
    let files: Vec<_> = fs::read_dir(dir.path()).unwrap().collect();
    assert_eq!(files.len(), 1);
}

#[test]
fn bad_format_is_a_validation_error() {
    let o = minibus(&["simulate", "--scenario", &scenario("model1"), "--format", "xml"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn sweep_writes_one_row_per_value() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().display().to_string();
    let o = minibus(&[
        "sweep", "--scenario", &scenario("model1"), "--dimension", "lambda", "--values", "40,60,80",
        "--replications", "20", "--out", &out,
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("model1_both_sweep_lambda.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    assert!(csv.starts_with("lambda_per_h,"));
}

#[test]
fn sweep_rejects_decreasing_values() {
    let o = minibus(&["sweep", "--scenario", &scenario("model1"), "--dimension", "capacity", "--values", "30,20"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn ingest_reproduces_the_bundled_case_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().display().to_string();
    for (route, data) in [("126", "cta126_boardings.csv"), ("84", "cta84_boardings.csv")] {
        let data = repo().join("data").join(data).display().to_string();
        let o = minibus(&["ingest", "--data", &data, "--route-id", route, "--out", &out]);
        assert!(o.status.success(), "{}", stderr(&o));
        let name = format!("cta{route}");
        assert_eq!(
            fs::read_to_string(dir.path().join(format!("{name}.json"))).unwrap(),
            fs::read_to_string(scenario(&name)).unwrap()
        );
    }
}

#[test]
fn ingest_of_unknown_route_exits_1() {
    let data = repo().join("data/cta126_boardings.csv").display().to_string();
    let o = minibus(&["ingest", "--data", &data, "--route-id", "9"]);
    assert_eq!(o.status.code(), Some(1));
}
