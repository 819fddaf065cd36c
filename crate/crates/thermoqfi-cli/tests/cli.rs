//! End-to-end checks of the binary: flag handling, exit codes, config
//! merging, output formats, and determinism.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_thermoqfi"))
}

fn run_args(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn qfi_prints_reference_value_with_full_precision() {
    let out = run_args(&[
        "qfi",
        "--nu",
        "1",
        "--alpha-model",
        "linear:g=1",
        "--T",
        "0.5",
        "--t",
        "1",
        "--n",
        "1",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let value: f64 = text.trim().parse().unwrap();
    let expected = (-1.0f64).exp() / (1.0 - (-1.0f64).exp());
    assert!((value - expected).abs() < 1e-10, "printed {value}, expected {expected}");
    // 17 significant digits in scientific notation
    assert!(text.trim().contains('e'));
    let mantissa = text.trim().split('e').next().unwrap().replace(['-', '.'], "");
    assert_eq!(mantissa.len(), 17, "got '{}'", text.trim());
}

#[test]
fn unknown_flag_is_a_usage_error_naming_the_flag() {
    let out = run_args(&["qfi", "--frobnicate", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("frobnicate"), "stderr should name the flag: {err}");
}

#[test]
fn missing_required_flag_is_a_usage_error() {
    let out = run_args(&["qfi", "--nu", "1", "--T", "0.5", "--t", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn degenerate_reference_is_a_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("flat.csv");
    std::fs::write(&table, "T,alpha\n0.1,0.3\n1.0,0.3\n").unwrap();
    let out = run_args(&[
        "nonmarkov",
        "--nu",
        "1",
        "--T",
        "0.5",
        "--alpha-model",
        &format!("table:{}", table.display()),
        "--channel",
        "dephasing:kappa=0.1,nu=1",
        "--t-grid",
        "1e-2:1:100",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn ramsey_fi_csv_header_is_exact() {
    let out = run_args(&[
        "ramsey-fi",
        "--nu",
        "1",
        "--T",
        "0.5",
        "--t-grid",
        "0.1:1:3",
        "--n",
        "1",
        "--phase",
        "pi",
        "--tau",
        "2",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("n,nu,T,t,phase,fi_per_shot,fi_total,delta_T\n"));
    assert_eq!(text.lines().count(), 4);
    assert!(!text.contains('\r'), "LF line endings only");
}

#[test]
fn regime_table_csv_header_is_exact() {
    let out = run_args(&[
        "regime-table",
        "--nu",
        "2",
        "--n",
        "2,4,8",
        "--t-cha",
        "0.01",
        "--T",
        "0.5",
        "--tau",
        "10",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with(
        "n,nu,t_cha,regime,t_star,delta_T_exact,delta_T_paper_branch,ratio,boundary_flag\n"
    ));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.json");
    std::fs::write(
        &config,
        r#"{"nu": 1.0, "alpha_model": "linear:g=1", "T": 0.5, "t": 1.0, "n": "1"}"#,
    )
    .unwrap();
    let from_config = run_args(&["qfi", "--config", config.to_str().unwrap()]);
    assert!(from_config.status.success());
    let base: f64 = stdout(&from_config).trim().parse().unwrap();

    // flag overrides the config temperature
    let overridden = run_args(&[
        "qfi",
        "--config",
        config.to_str().unwrap(),
        "--T",
        "1.0",
    ]);
    assert!(overridden.status.success());
    let hot: f64 = stdout(&overridden).trim().parse().unwrap();
    assert!(base != hot, "flag should override config");

    // identical semantics: config-only equals all-flags
    let flags = run_args(&[
        "qfi", "--nu", "1", "--alpha-model", "linear:g=1", "--T", "0.5", "--t", "1", "--n", "1",
    ]);
    assert_eq!(stdout(&from_config), stdout(&flags));

    // unknown config keys are usage errors
    std::fs::write(&config, r#"{"nu": 1.0, "bogus": 3}"#).unwrap();
    let bad = run_args(&["qfi", "--config", config.to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(2));
}

fn run_montecarlo_to(path: &Path, threads: &str) -> Output {
    bin()
        .env("THERMOQFI_THREADS", threads)
        .args([
            "montecarlo",
            "--nu",
            "1",
            "--T",
            "0.5",
            "--t",
            "1",
            "--n",
            "1",
            "--phase",
            "pi",
            "--shots",
            "20000",
            "--trials",
            "60",
            "--seed",
            "7",
            "--out",
            path.to_str().unwrap(),
        ])
        .output()
        .expect("binary runs")
}

#[test]
fn montecarlo_is_deterministic_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    assert!(run_montecarlo_to(&a, "1").status.success());
    assert!(run_montecarlo_to(&b, "4").status.success());
    let bytes_a = std::fs::read(&a).unwrap();
    let bytes_b = std::fs::read(&b).unwrap();
    assert_eq!(bytes_a, bytes_b, "outputs must not depend on the worker count");
}

#[test]
fn nonmarkov_emits_json_report() {
    let dir = tempfile::tempdir().unwrap();
    let rates = dir.path().join("rates.csv");
    let mut body = String::from("t,rate\n");
    for i in 0..=500 {
        let t = i as f64 / 500.0;
        let r = if t > 0.7 && t < 0.85 { -4.0 } else { 1.0 };
        body.push_str(&format!("{t},{r}\n"));
    }
    std::fs::write(&rates, body).unwrap();
    let out = run_args(&[
        "nonmarkov",
        "--nu",
        "1",
        "--T",
        "0.5",
        "--channel",
        &format!("dephasing:rates={}", rates.display()),
        "--t-grid",
        "1e-3:1:400",
    ]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(report["measure"].as_f64().unwrap() > 1e-4);
    assert!(report["positive_intervals"].as_array().unwrap().len() >= 1);
    // csv is not a meaningful format for this report
    let bad = run_args(&[
        "nonmarkov",
        "--nu",
        "1",
        "--T",
        "0.5",
        "--channel",
        "dephasing:kappa=0.1,nu=1",
        "--format",
        "csv",
    ]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn compare_states_reports_zeno_penalty() {
    let out = run_args(&[
        "compare-states",
        "--nu",
        "2",
        "--T",
        "0.5",
        "--tau",
        "10",
        "--n",
        "4",
        "--format",
        "json",
    ]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let ratio = report["ratio"].as_f64().unwrap();
    assert!((ratio - 4.0f64.powf(0.25)).abs() < 1e-6);
}
