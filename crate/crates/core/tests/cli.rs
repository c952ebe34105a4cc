use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use epiwave::artifacts::{read_report, report_path};
use epiwave::dataset::synthetic::write_synthetic_dataset;

fn epiwave(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_epiwave")).args(args).env_remove("EPIWAVE_DATA_DIR").output().expect("run epiwave")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn surrogate() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    write_synthetic_dataset(dir.path(), 1).unwrap();
    dir
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn verify_data_accepts_complete_archive() {
    let data = surrogate();
    let o = epiwave(&["verify-data", "--data-dir", s(data.path())]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("5 sets, 500 files, 500 valid, OK"), "{}", stdout(&o));
}

#[test]
fn verify_data_names_truncated_file() {
    let data = surrogate();
    let victim = data.path().join("N042.txt");
    let text = fs::read_to_string(&victim).unwrap();
    let short: Vec<&str> = text.lines().take(4000).collect();
    fs::write(&victim, short.join("\n")).unwrap();
    let o = epiwave(&["verify-data", "--data-dir", s(data.path())]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("N042.txt"), "{}", stdout(&o));
    assert!(stdout(&o).contains("INVALID"));
}

#[test]
fn verify_data_missing_directory() {
    let o = epiwave(&["verify-data", "--data-dir", "/nonexistent/bonn"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("directory not found"), "{}", stderr(&o));
}

#[test]
fn data_dir_from_environment() {
    let data = surrogate();
    let o = Command::new(env!("CARGO_BIN_EXE_epiwave"))
        .arg("verify-data")
        .env("EPIWAVE_DATA_DIR", data.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn train_without_features_is_input_error() {
    let out = tempfile::tempdir().unwrap();
    let o = epiwave(&["train", "--output-dir", s(out.path()), "--cases", "A-E"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("train: missing upstream artifact"), "{}", stderr(&o));
}

#[test]
fn stats7_features_have_42_columns() {
    let data = surrogate();
    let out = tempfile::tempdir().unwrap();
    let common =
        ["--data-dir", s(data.path()), "--output-dir", s(out.path()), "--cases", "B-D", "--extractor", "stats7"];
    let o = epiwave(&[&["decompose"], &common[..]].concat());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = epiwave(&[&["features"], &common[..]].concat());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(out.path().join("B-D/features_train.csv")).unwrap();
    let header = text.lines().nth(1).unwrap();
    let cols: Vec<&str> = header.split(',').collect();
    assert_eq!(cols.len(), 43);
    assert_eq!(cols.last(), Some(&"label"));
    assert_eq!(text.lines().count(), 2 + 160);
}

#[test]
fn stale_upstream_artifact_rejected() {
    let data = surrogate();
    let out = tempfile::tempdir().unwrap();
    let base = ["--data-dir", s(data.path()), "--output-dir", s(out.path()), "--cases", "A-E"];
    assert_eq!(epiwave(&[&["decompose"], &base[..]].concat()).status.code(), Some(0));
    let o = epiwave(&[&["features"], &base[..], &["--seed", "7"]].concat());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("digest"), "{}", stderr(&o));
}

#[test]
fn staged_pipeline_equals_single_shot() {
    let data = surrogate();
    let staged = tempfile::tempdir().unwrap();
    let single = tempfile::tempdir().unwrap();
    let cfg = ["--data-dir", s(data.path()), "--cases", "A-E,B-C", "--seed", "5"];
    for stage in ["decompose", "features", "train", "evaluate"] {
        let o = epiwave(&[&[stage, "--output-dir", s(staged.path())], &cfg[..]].concat());
        assert_eq!(o.status.code(), Some(0), "{stage}: {}", stderr(&o));
    }
    let o = epiwave(&[&["reproduce", "--no-bands", "--output-dir", s(single.path())], &cfg[..]].concat());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for case in ["A-E", "B-C"] {
        for clf in ["knn", "svm", "nb"] {
            let a = read_report(&report_path(&staged.path().join(case), clf.parse().unwrap())).unwrap();
            let b = read_report(&single.path().join(format!("reports/{case}_{clf}_seed5.json"))).unwrap();
            assert_eq!(a.without_timing(), b.without_timing(), "{case}/{clf}");
        }
    }
    let csv = fs::read_to_string(single.path().join("results.csv")).unwrap();
    assert_eq!(csv.lines().count(), 7);
}

#[test]
fn reproduce_filters_and_multi_seed() {
    let data = surrogate();
    let out = tempfile::tempdir().unwrap();
    let o = epiwave(&[
        "reproduce",
        "--no-bands",
        "--data-dir",
        s(data.path()),
        "--output-dir",
        s(out.path()),
        "--cases",
        "A-E",
        "--classifiers",
        "knn",
        "--seeds",
        "1..3",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("±"));
    let csv = fs::read_to_string(out.path().join("results.csv")).unwrap();
    let seeds: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').nth(3).unwrap()).collect();
    assert_eq!(seeds, ["1", "2", "3"]);
    let summary = fs::read_to_string(out.path().join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 2);
}

#[test]
fn reproduce_with_empty_case_list() {
    let out = tempfile::tempdir().unwrap();
    let o = epiwave(&["reproduce", "--cases", "", "--output-dir", s(out.path())]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(out.path().join("results.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1);
}

#[test]
fn reproduce_cell_errors_exit_1() {
    let data = surrogate();
    fs::remove_file(data.path().join("S007.txt")).unwrap();
    let out = tempfile::tempdir().unwrap();
    let o = epiwave(&[
        "reproduce",
        "--data-dir",
        s(data.path()),
        "--output-dir",
        s(out.path()),
        "--cases",
        "A-E,A-C",
        "--classifiers",
        "nb",
    ]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    let csv = fs::read_to_string(out.path().join("results.csv")).unwrap();
    assert!(csv.lines().any(|l| l.starts_with("A-E,nb") && l.contains("ERROR")));
    assert!(csv.lines().any(|l| l.starts_with("A-C,nb") && !l.contains("ERROR")));
}

#[test]
fn decompose_single_file() {
    let data = surrogate();
    let o = epiwave(&["decompose", "--input", s(&data.path().join("Z001.txt"))]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    for line in ["A5,134,", "D5,134,", "D4,262,", "D3,518,", "D2,1029,", "D1,2052,"] {
        assert!(text.contains(line), "{text}");
    }
}
