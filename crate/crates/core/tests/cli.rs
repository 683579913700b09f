//! The `dtdd` binary end to end.

use std::path::Path;
use std::process::{Command, Output};

const CONFIG: &str = r#"
scheme = "cf_dtdd_greedy"
demand = 0.5
drops = 3
seed = 9

[network]
area_side_m = 200.0
num_aps = 4
antennas_per_ap = 2
num_ues = 4
cli_residual_db = -20.0

[pilot]
tau = 100
tau_p = 2

[powers]
ul_snr_db = 10.0
dl_snr_db = 10.0
"#;

fn dtdd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dtdd"))
        .args(args)
        .output()
        .expect("dtdd runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("exp.toml");
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn run_writes_reproducible_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONFIG);
    let out = |name: &str| dir.path().join(name).to_str().unwrap().to_string();
    let a = dtdd(&["run", "--config", &cfg, "--out", &out("a")]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    let b = dtdd(&["run", "--config", &cfg, "--out", &out("b"), "--threads", "1"]);
    assert!(b.status.success());
    let csv_a = std::fs::read_to_string(dir.path().join("a/results.csv")).unwrap();
    let csv_b = std::fs::read_to_string(dir.path().join("b/results.csv")).unwrap();
    assert_eq!(csv_a, csv_b);
    assert!(csv_a.starts_with("drop,sum_se,ul_se,dl_se\n"));
    assert_eq!(csv_a.lines().count(), 4);
}

#[test]
fn seed_and_drops_flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONFIG);
    let out = dir.path().join("o");
    let r = dtdd(&[
        "run",
        "--config",
        &cfg,
        "--seed",
        "10",
        "--drops",
        "5",
        "--format",
        "json",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(r.status.success());
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("results.json")).unwrap()).unwrap();
    assert_eq!(v["seed"], 10);
    assert_eq!(v["points"][0]["drops"].as_array().unwrap().len(), 5);
}

#[test]
fn validate_reports_every_sinr() {
    let dir = tempfile::tempdir().unwrap();
    let r = dtdd(&[
        "validate",
        "--drops",
        "2",
        "--realizations",
        "20000",
        "--tolerance",
        "0.05",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    let stdout = String::from_utf8_lossy(&r.stdout);
    assert!(r.status.success(), "{stdout}");
    assert_eq!(stdout.matches("PASS").count(), 2);
    let csv = std::fs::read_to_string(dir.path().join("validation.csv")).unwrap();
    assert!(csv.starts_with("fixture,direction,ue,closed_form,monte_carlo,relative_error"));
}

#[test]
fn audit_and_oracle_run_on_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONFIG);
    let out = dir.path().to_str().unwrap();
    let a = dtdd(&[
        "audit", "--config", &cfg, "--trials", "200", "--format", "json", "--out", out,
    ]);
    assert!(a.status.code() == Some(0) || a.status.code() == Some(2));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("audit.json")).unwrap()).unwrap();
    assert_eq!(report["trials"], 600);
    let o = dtdd(&["oracle", "--config", &cfg, "--out", out]);
    assert!(o.status.success());
    let csv = std::fs::read_to_string(dir.path().join("oracle.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    for line in csv.lines().skip(1) {
        let ratio: f64 = line.split(',').nth(3).unwrap().parse().unwrap();
        assert!(ratio > 0.0 && ratio <= 1.0 + 1e-12, "{line}");
    }
}

#[test]
fn bad_config_fails_with_message() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &CONFIG.replace("num_aps = 4", "num_aps = 0"));
    let r = dtdd(&["run", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&r.stderr).contains("num_aps"));
    let r = dtdd(&["run", "--config", &cfg, "--format", "xml"]);
    assert!(!r.status.success());
}
