use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_psqfim"))
}

fn shipped(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn run_scenario(cmd: &str, path: &Path, extra: &[&str]) -> Output {
    let mut args = vec![cmd, "--scenario", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    run(&args)
}

/// Writes a modified copy of a shipped scenario.
fn variant(dir: &tempfile::TempDir, name: &str, edit: impl FnOnce(&mut Value)) -> PathBuf {
    let mut value: Value = serde_json::from_str(&fs::read_to_string(shipped(name)).unwrap()).unwrap();
    edit(&mut value);
    let path = dir.path().join(format!("variant-{name}"));
    fs::write(&path, serde_json::to_string(&value).unwrap()).unwrap();
    path
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn qfim_paper_scenario() {
    let out = run_scenario("qfim", &shipped("paper_qubit.json"), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("2.82842712475"), "{text}");
    assert!(text.contains("geometric quantumness: 1"), "{text}");
}

#[test]
fn qfim_single_parameter_is_four() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("qfim.csv");
    let out = run_scenario("qfim", &shipped("single_param_crb.json"), &["--csv", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&fs::read_to_string(csv).unwrap());
    assert_eq!(rows[0][0], "qfim");
    assert!((rows[0][3].parse::<f64>().unwrap() - 4.0).abs() < 1e-12);
}

#[test]
fn non_hermitian_generator_exits_2_with_path() {
    let dir = tempfile::tempdir().unwrap();
    let path = variant(&dir, "paper_qubit.json", |v| {
        v["generators"][1][0][1] = serde_json::json!([0.3, 0.0]);
    });
    let out = run_scenario("qfim", &path, &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("generators[1]"), "{}", stderr(&out));
}

#[test]
fn missing_file_and_missing_field_exit_2() {
    let out = run(&["qfim", "--scenario", "/nonexistent/scenario.json"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run_scenario("crb", &shipped("paper_qubit.json"), &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("povm"), "{}", stderr(&out));
}

#[test]
fn distill_paper_scenario() {
    let out = run_scenario("distill", &shipped("paper_qubit.json"), &[]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("success probability p_ps: 0.13"), "{text}");
    assert!(stderr(&out).contains("warning: regime ratio 0.2"), "{}", stderr(&out));
}

#[test]
fn distill_noop_at_unit_transmissivity() {
    let dir = tempfile::tempdir().unwrap();
    let path = variant(&dir, "paper_qubit.json", |v| v["t"] = serde_json::json!(1.0));
    let out = run_scenario("distill", &path, &[]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("no-op distillation"));
    let text = stdout(&out);
    let residual: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("lossless residual max|p_ps * exact - undistilled|: "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(residual <= 1e-9);
}

#[test]
fn regime_warning_absent_when_small() {
    let dir = tempfile::tempdir().unwrap();
    let path = variant(&dir, "paper_qubit.json", |v| v["theta_guess"] = v["theta_true"].clone());
    let out = run_scenario("distill", &path, &[]);
    assert_eq!(out.status.code(), Some(0));
    assert!(!stderr(&out).contains("warning"));
}

#[test]
fn kd_verdicts() {
    let out = run_scenario("kd", &shipped("paper_qubit.json"), &[]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("distribution: nonclassical"), "{text}");
    assert!(text.contains("entry exceeds classical bound: yes"), "{text}");

    let out = run_scenario("kd", &shipped("commuting_classical.json"), &[]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("distribution: classical"), "{text}");
    assert!(text.contains("entry exceeds classical bound: no"), "{text}");
}

#[test]
fn kd_identity_postselection_has_unit_probability() {
    let dir = tempfile::tempdir().unwrap();
    let path = variant(&dir, "paper_qubit.json", |v| v["t"] = serde_json::json!(1.0));
    let out = run_scenario("kd", &path, &[]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("success probability p_ps: 1\n"), "{}", stdout(&out));
}

#[test]
fn sweep_determinant_scaling_at_zero_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = variant(&dir, "paper_qubit.json", |v| v["theta_guess"] = v["theta_true"].clone());
    let out = run_scenario("sweep", &path, &["--t-list", "1,0.5,0.25"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(
        text.lines().next().unwrap(),
        "t,p_ps,det_qfim_exact,det_qfim_pred,lossless_residual,risk_lower,risk_upper,regime_ratio,error"
    );
    let rows = csv_rows(&text);
    let det = |r: usize| rows[r][2].parse::<f64>().unwrap();
    // M = 2: each halving of t multiplies the determinant by 2^(2M) = 16
    assert!((det(1) / det(0) - 16.0).abs() < 1e-8);
    assert!((det(2) / det(1) - 16.0).abs() < 1e-8);
    assert!(rows[0][4].parse::<f64>().unwrap() <= 1e-9);
}

#[test]
fn sweep_is_stable_and_records_bad_rows() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let scenario = shipped("paper_qubit.json");
    let out = run_scenario("sweep", &scenario, &["--t-list", "0.9,0,0.4", "--csv", a.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    run_scenario("sweep", &scenario, &["--t-list", "0.9,0,0.4", "--csv", b.to_str().unwrap()]);
    let first = fs::read_to_string(&a).unwrap();
    assert_eq!(first, fs::read_to_string(&b).unwrap());
    let rows = csv_rows(&first);
    let ts: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(ts, vec![0.9, 0.0, 0.4]);
    assert!(rows[1][8..].join(",").contains("transmissivity 0 outside"));
    assert!(rows[0].last().unwrap().is_empty());
}

#[test]
fn sweep_fails_only_when_every_row_fails() {
    let out = run_scenario("sweep", &shipped("paper_qubit.json"), &["--t-list", "0,1.5"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run_scenario("sweep", &shipped("paper_qubit.json"), &["--t-list", "0.5,abc"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn paper_example_default_run_passes_all_checks() {
    let out = run(&["paper-example"]);
    let text = stdout(&out);
    assert!(text.contains("[PASS] qfim closed form:"), "{text}");
    assert_eq!(out.status.code(), Some(0), "{text}");
}

#[test]
fn paper_example_overrides() {
    let out = run(&["paper-example", "--t", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).contains("distillation factor 1/t^2: 1\n"));

    let out = run(&["paper-example", "--theta1", "0", "--t", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).contains("learnability interval (W = 1, N = 1): unavailable (matrix is singular"));
}

#[test]
fn paper_example_rejects_invalid_transmissivity() {
    let out = run(&["paper-example", "--t", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("[FAIL] distillation"));
}

#[test]
fn crb_shipped_scenario_within_soft_bound() {
    let out = run_scenario("crb", &shipped("single_param_crb.json"), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains(": pass\n"), "{}", stdout(&out));
}

#[test]
fn crb_zero_trials_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = variant(&dir, "single_param_crb.json", |v| v["trials"] = serde_json::json!(0));
    let out = run_scenario("crb", &path, &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("trials"));
}

#[test]
fn crb_csv_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let scenario = shipped("single_param_crb.json");
    run_scenario("crb", &scenario, &["--csv", a.to_str().unwrap()]);
    run_scenario("crb", &scenario, &["--csv", b.to_str().unwrap()]);
    let first = fs::read(&a).unwrap();
    assert!(!first.is_empty());
    assert_eq!(first, fs::read(&b).unwrap());
}

#[test]
fn unknown_subcommand_is_usage_error() {
    let out = run(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}
