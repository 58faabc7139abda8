// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn synth(args: &[&str], out_dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_synth"))
        .args(args)
        .env("SYNTH_OUT_DIR", out_dir)
        .output()
        .expect("spawn synth")
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn config(name: &str) -> String {
    configs_dir().join(name).to_string_lossy().into_owned()
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

#[test]
fn gates_list_names_every_gate() {
    let tmp = tempfile::tempdir().unwrap();
    let out = synth(&["gates", "list"], tmp.path());
    assert!(out.status.success());
    let stdout = text(&out.stdout);
    for name in ["X90_Q1", "Z90_Q2", "ISWAP", "DOUBLE_ISWAP", "CZ", "CCCX"] {
        assert!(stdout.lines().any(|l| l.starts_with(&format!("{name}\t"))), "{name} missing:\n{stdout}");
    }
    assert!(stdout.contains("CCCZ\t16x16"));
}

#[test]
fn gates_show_prints_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let out = synth(&["gates", "show", "iswap"], tmp.path());
    assert!(out.status.success());
    let stdout = text(&out.stdout);
    let mut lines = stdout.lines();
    assert!(lines.next().unwrap().contains(','));
    assert_eq!(lines.count(), 16);

    let out = synth(&["gates", "show", "NOPE"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn shipped_configs_validate() {
    let tmp = tempfile::tempdir().unwrap();
    let mut paths: Vec<String> = std::fs::read_dir(configs_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "cfg"))
        .map(|p| p.to_string_lossy().into_owned())
        .collect();
    paths.sort();
    assert!(paths.len() >= 8);
    let mut args = vec!["validate"];
    args.extend(paths.iter().map(String::as_str));
    let out = synth(&args, tmp.path());
    assert!(out.status.success(), "{}", text(&out.stderr));
    assert_eq!(text(&out.stdout).lines().count(), paths.len());
}

fn write_variant(dir: &Path, base: &str, edit: impl Fn(String) -> String) -> String {
    let src = std::fs::read_to_string(config(base)).unwrap();
    let path = dir.join(format!("variant_{base}"));
    std::fs::write(&path, edit(src)).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn two_transmon_gate_on_single_transmon_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_variant(tmp.path(), "x90_q2.cfg", |s| s.replace("target = \"X90_Q2\"", "target = \"CZ\""));
    for cmd in ["validate", "run"] {
        let out = synth(&[cmd, &cfg], tmp.path());
        assert_eq!(out.status.code(), Some(1), "{cmd}");
        let err = text(&out.stderr);
        assert!(err.contains("target") && err.contains("16") && err.contains('4'), "{err}");
    }
    assert!(!tmp.path().join("x90_q2").exists());
}

#[test]
fn malformed_config_names_the_field() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_variant(tmp.path(), "x90_q2.cfg", |s| s.replacen("min = 4.9, max = 5.1", "min = 5.05, max = 5.1", 1));
    let out = synth(&["validate", &cfg], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out.stderr).contains("ch0.tone0.frequency"));

    let missing = tmp.path().join("absent.cfg");
    let out = synth(&["validate", &missing.to_string_lossy()], tmp.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn zero_budget_reports_initial_goal_only() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_variant(tmp.path(), "x90_q2.cfg", |s| s.replace("budget = 2000", "budget = 0"));
    let out = synth(&["run", &cfg], tmp.path());
    assert_eq!(out.status.code(), Some(2), "{}", text(&out.stderr));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(tmp.path().join("x90_q2/report.json")).unwrap()).unwrap();
    let opt = &report["optimization"];
    assert_eq!(opt["termination"], "budget");
    assert_eq!(opt["initial_goal"], opt["final_goal"]);
    assert_eq!(opt["trace"].as_array().unwrap().len(), 1);
    assert_eq!(report["reached"], false);
}

#[test]
fn run_writes_artifacts_and_reaches_threshold() {
    let tmp = tempfile::tempdir().unwrap();
    let out = synth(&["run", &config("x90_q2.cfg"), "--out", &tmp.path().join("custom").to_string_lossy()], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    assert!(text(&out.stdout).contains("reached"));
    let dir = tmp.path().join("custom/x90_q2");
    for f in ["report.json", "parameters.json", "trace.csv", "waveform.csv", "spectrum.csv", "propagator.csv", "hinton.csv", "error_matrix.csv"] {
        let body = std::fs::read_to_string(dir.join(f)).unwrap_or_else(|e| panic!("{f}: {e}"));
        assert!(body.len() > 10, "{f}");
        if f.ends_with(".csv") {
            let header = body.lines().next().unwrap();
            assert!(header.contains(',') && !header.chars().next().unwrap().is_ascii_digit(), "{f}: {header}");
        }
    }
    assert!(!dir.join("pruning_curve.csv").exists());
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap();
    assert!(report["final_goal"].as_f64().unwrap() < 1e-5);
}

#[test]
fn spectrum_lists_resonances() {
    let tmp = tempfile::tempdir().unwrap();
    let out = synth(&["spectrum", &config("x90_q2.cfg")], tmp.path());
    assert!(out.status.success(), "{}", text(&out.stderr));
    let stdout = text(&out.stdout);
    assert!(stdout.starts_with("freq_GHz,label"));
    assert!(stdout.lines().count() > 3);
}

#[test]
fn jobs_run_in_parallel_and_worst_status_wins() {
    let tmp = tempfile::tempdir().unwrap();
    let zero = write_variant(tmp.path(), "x90_q2.cfg", |s| {
        s.replace("budget = 2000", "budget = 0").replace("name = \"x90_q2\"", "name = \"zero\"")
    });
    let short = write_variant(tmp.path(), "iswap.cfg", |s| s.replace("budget = 2000", "budget = 0"));
    let out = synth(&["run", &zero, &short, "--jobs", "2"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(tmp.path().join("zero/report.json").exists());
    assert!(tmp.path().join("iswap/report.json").exists());

    let bad = write_variant(tmp.path(), "z90_q2.cfg", |s| s.replace("target = \"Z90_Q2\"", "target = \"CCCZ\""));
    let out = synth(&["run", &zero, &bad, "--jobs", "2"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
}
