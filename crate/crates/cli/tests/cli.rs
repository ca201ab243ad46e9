use std::fs;
use std::path::Path;
use std::process::Command;

use serde_json::Value;

fn sos() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sos"))
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn oracle_verify_writes_all_outputs_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("oracle");
    let status = sos()
        .args(["run", "--experiment", "oracle-verify", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    for name in ["config.json", "series.csv", "summary.json", "verify.json"] {
        assert!(out.join(name).is_file(), "{name} missing");
    }
    let verify = json(&out.join("verify.json"));
    assert_eq!(verify["passed"], true);
    assert!(verify["records"].as_array().unwrap().len() > 10);
    let csv = fs::read_to_string(out.join("series.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# sos "));
    assert!(lines.next().unwrap().starts_with("# config {"));
    assert_eq!(
        lines.next().unwrap(),
        "check,beta,case,lhs,rhs,discrepancy,pass"
    );
    assert!(!csv.contains(",false\n"));
}

#[test]
fn flags_override_file_which_overrides_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("run.toml");
    fs::write(
        &file,
        "experiment = \"critical-height-explore\"\nbeta = 1.5\nN = [4]\nsweeps = 40\nburn_in = 10\nseed = 3\n",
    )
    .unwrap();
    let out = dir.path().join("che");
    let status = sos()
        .arg("run")
        .arg(&file)
        .args(["--seed", "9", "--thinning", "5", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let config = &json(&out.join("config.json"))["config"];
    assert_eq!(config["beta"], 1.5);
    assert_eq!(config["N"], serde_json::json!([4]));
    assert_eq!(config["seed"], 9);
    assert_eq!(config["thinning"], 5);
    assert_eq!(config["burn_in"], 10);
    assert_eq!(config["h_mode"], "fraction_of_hw");
    let summary = json(&out.join("summary.json"));
    assert_eq!(summary["experiment"], "critical-height-explore");
    assert_eq!(summary["results"]["jobs"][0]["run"]["kept_samples"], 6);
}

#[test]
fn absolute_h_flag_is_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("abs");
    let status = sos()
        .args([
            "run",
            "--experiment",
            "subcritical-height",
            "--h",
            "0.001,0.002",
            "--N",
            "4",
            "--sweeps",
            "20",
            "--out",
        ])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let config = &json(&out.join("config.json"))["config"];
    assert_eq!(config["h_mode"], "absolute");
    assert_eq!(config["h_resolved"], serde_json::json!([0.001, 0.002]));
}

#[test]
fn invalid_configs_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never");
    let cases: [&[&str]; 4] = [
        &["run"],
        &["run", "--experiment", "subcritical-height", "--beta=-1"],
        &["run", "--experiment", "domination", "--h-frac", "0.5"],
        &[
            "run",
            "--experiment",
            "sampler-validate",
            "--sweeps",
            "10",
            "--burn-in",
            "20",
        ],
    ];
    for args in cases {
        let status = sos().args(args).arg("--out").arg(&out).status().unwrap();
        assert_eq!(status.code(), Some(2), "{args:?}");
    }
    let bad_file = dir.path().join("bad.toml");
    fs::write(
        &bad_file,
        "experiment = \"oracle-verify\"\nunknown_key = 1\n",
    )
    .unwrap();
    let status = sos()
        .arg("run")
        .arg(&bad_file)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn unknown_experiment_is_rejected_by_the_parser() {
    let output = sos()
        .args(["run", "--experiment", "nonsense"])
        .output()
        .unwrap();
    assert!(!output.status.success());
    assert!(String::from_utf8_lossy(&output.stderr).contains("nonsense"));
}
