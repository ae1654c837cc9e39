//! End-to-end tests of the `gradmem` binary: subcommands, artifacts, and
//! exit codes (0 success, 2 config error, 3 I/O failure).

use std::path::Path;
use std::process::{Command, Output};

fn gradmem(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gradmem"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.json");
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

const QUAD_CONFIG: &str = r#"{
    "problem": {"quadratic": {"eigs": [1.0, 4.0, 10.0]}},
    "optimizer": {"lr": 0.02, "theta0": [1.0, 1.0, 1.0]},
    "buffer": {"topc": 3, "decay": 0.8},
    "oracle": {"gaussian": {"sigma": 0.3}},
    "steps": 50,
    "seeds": [0, 1]
}"#;

#[test]
fn rate_prints_known_values() {
    let out = gradmem(&[
        "rate", "--alpha", "0.1", "--k", "1", "--mu", "1", "--l", "10", "--sigma2", "1",
    ]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((report["q_sv"].as_f64().unwrap() - 0.9).abs() < 1e-12);
    assert!((report["q_sr"].as_f64().unwrap() - 0.9).abs() < 1e-12);
    assert!((report["variance_bound"].as_f64().unwrap() - 0.052631578947368446).abs() < 1e-12);
    assert!(report["note"].is_null());
}

#[test]
fn rate_flags_k2_certificate_gap() {
    let out = gradmem(&[
        "rate", "--alpha", "0.1", "--k", "2", "--mu", "1", "--l", "10",
    ]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["q_sv"].as_f64().unwrap() >= 1.0);
    assert!(report["variance_bound"].is_null());
    assert!(report["note"].as_str().unwrap().contains("q_sr"));
}

#[test]
fn rate_rejects_mu_above_l_with_exit_2() {
    let out = gradmem(&["rate", "--alpha", "0.1", "--k", "1", "--mu", "5", "--l", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn train_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), QUAD_CONFIG);
    let out_dir = dir.path().join("out");
    let out = gradmem(&["train", "--config", &config, "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out_dir.join("run_seed0.csv").exists());
    assert!(out_dir.join("run_seed1.csv").exists());
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["seeds"].as_array().unwrap().len(), 2);
    assert!(summary["final_loss_mean"].as_f64().unwrap().is_finite());
}

#[test]
fn train_flag_overrides_apply() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), QUAD_CONFIG);
    let out_dir = dir.path().join("out");
    let out = gradmem(&[
        "train",
        "--config",
        &config,
        "--seed",
        "7",
        "--steps",
        "5",
        "--topc",
        "0",
        "--optimizer",
        "adam",
        "--aggr",
        "sum",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out_dir.join("run_seed7.csv").exists());
    let csv = std::fs::read_to_string(out_dir.join("run_seed7.csv")).unwrap();
    assert_eq!(csv.lines().count(), 6); // header + 5 steps
}

#[test]
fn unknown_config_key_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"{"problem": {"quadratic": {"eigs": [1.0]}}, "mystery": true}"#,
    );
    let out = gradmem(&["train", "--config", &config]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("mystery"));
}

#[test]
fn missing_config_file_exits_3() {
    let out = gradmem(&["train", "--config", "/nonexistent/path/config.json"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn unwritable_out_dir_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), QUAD_CONFIG);
    // A file where the output directory should go.
    let blocker = dir.path().join("blocked");
    std::fs::write(&blocker, "file").unwrap();
    let out = gradmem(&[
        "train",
        "--config",
        &config,
        "--out",
        blocker.join("sub").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn bad_flag_value_exits_2() {
    let out = gradmem(&["train", "--aggr", "bogus"]);
    assert_eq!(out.status.code(), Some(2));
    let out = gradmem(&["train", "--select", "bogus"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn repeated_topc_only_for_normgap() {
    let out = gradmem(&["train", "--topc", "1", "--topc", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_reports_tiny_discrepancy() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), QUAD_CONFIG);
    let out = gradmem(&["simulate", "--config", &config, "--steps", "100"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["max_discrepancy"].as_f64().unwrap() < 1e-10);
    assert!(report["staleness"].as_u64().unwrap() >= 1);
}

#[test]
fn simulate_requires_sgd_rule() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), QUAD_CONFIG);
    let out = gradmem(&["simulate", "--config", &config, "--optimizer", "adam"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn staleness_writes_histogram() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), QUAD_CONFIG);
    let out_dir = dir.path().join("out");
    let out = gradmem(&[
        "staleness",
        "--config",
        &config,
        "--steps",
        "200",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(out_dir.join("staleness.csv")).unwrap();
    assert!(csv.starts_with("age,count\n"));
    assert!(csv.lines().count() > 1);
}

#[test]
fn normgap_accepts_repeated_topc() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), QUAD_CONFIG);
    let out_dir = dir.path().join("out");
    let out = gradmem(&[
        "normgap",
        "--config",
        &config,
        "--topc",
        "0",
        "--topc",
        "3",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out_dir.join("normgap_topc0.csv").exists());
    assert!(out_dir.join("normgap_topc3.csv").exists());
    assert!(out_dir.join("normgap_summary.json").exists());
}

#[test]
fn ablate_single_cell_writes_table() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), QUAD_CONFIG);
    let out_dir = dir.path().join("out");
    let out = gradmem(&[
        "ablate",
        "--config",
        &config,
        "--select",
        "koth",
        "--replace",
        "minproxy",
        "--steps",
        "30",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = std::fs::read_to_string(out_dir.join("ablation.csv")).unwrap();
    assert_eq!(table.lines().count(), 2);
    assert!(table.lines().nth(1).unwrap().starts_with("koth,minproxy,mean,"));
}

#[test]
fn staleness_cli_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), QUAD_CONFIG);
    let run = |name: &str| {
        let out_dir = dir.path().join(name);
        let out = gradmem(&[
            "staleness",
            "--config",
            &config,
            "--seed",
            "3",
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert!(out.status.success());
        std::fs::read(out_dir.join("staleness.csv")).unwrap()
    };
    assert_eq!(run("a"), run("b"));
}
