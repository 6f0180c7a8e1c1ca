//! End-to-end tests of the `carnot-affine` binary.

use std::path::PathBuf;
use std::process::Command;

use carnot_affine::cli::{analyze, AnalysisReport, ReportFlags};
use carnot_affine::gallery;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_carnot-affine"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("carnot-affine-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn json_report_round_trips() {
    let dir = scratch("specs");
    let status = bin().args(["examples", "--all", "--emit-specs"]).arg(&dir).status().unwrap();
    assert!(status.success());
    for entry in gallery::entries() {
        let path = dir.join(format!("{}.json", entry.name));
        let out = bin().args(["--json", "analyze"]).arg(&path).output().unwrap();
        assert_eq!(out.status.code(), Some(0), "{}", entry.name);
        let parsed: AnalysisReport = serde_json::from_slice(&out.stdout).unwrap();
        let in_memory = analyze(&(entry.build)().unwrap(), ReportFlags::default()).unwrap();
        assert_eq!(parsed, in_memory, "{}", entry.name);
        assert!(out.stderr.is_empty());
    }
}

#[test]
fn optional_sections_round_trip() {
    let spec = gallery::find("ex62").unwrap();
    let flags = ReportFlags { basis: true, witness: true, f3: true };
    let report = analyze(&(spec.build)().unwrap(), flags).unwrap();
    assert!(report.witness.is_some() && report.f3_triple.is_some());
    assert_eq!(report.basis.as_ref().map(Vec::len), Some(12));
    let text = serde_json::to_string(&report).unwrap();
    assert_eq!(serde_json::from_str::<AnalysisReport>(&text).unwrap(), report);
}

#[test]
fn free_reports_dimensions() {
    let out = bin().args(["--json", "free", "4"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let report: AnalysisReport = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!((report.dim_haffine, report.dim_affine), (16, 11));
    assert_eq!(report.verdict, "non_affine");
}

#[test]
fn large_free_rank_warns_on_stderr() {
    let out = bin().args(["free", "11"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
    assert!(String::from_utf8_lossy(&out.stdout).contains("2048"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(bin().args(["free", "1"]).output().unwrap().status.code(), Some(2));
    assert_eq!(bin().args(["frobnicate"]).output().unwrap().status.code(), Some(2));
    assert_eq!(bin().args(["examples", "no_such_group"]).output().unwrap().status.code(), Some(2));
    let garbled = scratch("garbled.json");
    std::fs::write(&garbled, "{not json").unwrap();
    let out = bin().arg("analyze").arg(&garbled).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
}

#[test]
fn invalid_specs_exit_3() {
    let cases = [
        r#"{"format":"structure_constants","rank":3,"dim_v2":1,"brackets":[]}"#,
        r#"{"format":"structure_constants","rank":1,"dim_v2":1,"brackets":[]}"#,
        r#"{"format":"free_quotient","n":3,"kernel1":[],"kernel2":[["1","0","0"],["0","1","0"],["0","0","1"]]}"#,
        r#"{"format":"free_quotient","n":3,"kernel1":[["1","0","0"]],"kernel2":[]}"#,
    ];
    for (i, text) in cases.iter().enumerate() {
        let path = scratch(&format!("invalid{i}.json"));
        std::fs::write(&path, text).unwrap();
        let out = bin().arg("analyze").arg(&path).output().unwrap();
        assert_eq!(out.status.code(), Some(3), "case {i}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn examples_match_and_list() {
    let out = bin().args(["examples", "--all", "--trials", "20"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let listed = bin().args(["examples", "--list"]).output().unwrap();
    let names = String::from_utf8_lossy(&listed.stdout);
    for entry in gallery::entries() {
        assert!(names.contains(entry.name));
    }
}

#[test]
fn check_subset_passes() {
    let out = bin().args(["check", "--trials", "10", "--only", "wedge"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).lines().all(|l| l.starts_with("PASS")));
}
