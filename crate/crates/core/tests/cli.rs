//! Black-box tests of the command-line binary: exit codes, file outputs,
//! determinism, and output-directory resolution.

use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const FIG1_CONFIG: &str = "\
[market]
mu_tilde = 0.05
sigma = 0.2
rate = 0.0
atoms = -0.2876820724517809:0.25

[utility]
kind = power
beta = 1.0

[claim]
kind = put
strike = 100.0
maturity = 1.0

[run]
method = utility
";

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_jumphedge"))
}

fn write_config(dir: &TempDir, contents: &str) -> std::path::PathBuf {
    let path = dir.path().join("run.cfg");
    std::fs::write(&path, contents).unwrap();
    path
}

fn run(args: &[&str], config: &Path) -> Output {
    bin().args(args).arg("--config").arg(config).output().unwrap()
}

#[test]
fn invest_prints_optimal_fraction() {
    let dir = TempDir::new().unwrap();
    let config = write_config(&dir, FIG1_CONFIG);
    let out = run(&["invest"], &config);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    let value: f64 = stdout.trim().strip_prefix("pi_tilde = ").unwrap().parse().unwrap();
    assert!((value - 0.8367093674160353).abs() < 1e-12);
}

#[test]
fn price_writes_strike_sweep_csv() {
    let dir = TempDir::new().unwrap();
    let config = write_config(&dir, FIG1_CONFIG);
    let out_path = dir.path().join("sweep.csv");
    let out = bin()
        .args(["price", "--strikes", "50:200:25", "--out"])
        .arg(&out_path)
        .arg("--config")
        .arg(&config)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(&out_path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "strike,moneyness_k_over_s,moneyness_s_over_k,price,implied_vol"
    );
    assert_eq!(lines.count(), 7); // strikes 50..=200 step 25
}

#[test]
fn repeated_invocations_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let config = write_config(&dir, FIG1_CONFIG);
    let sweep = |name: &str| {
        let out_path = dir.path().join(name);
        let out = bin()
            .args(["price", "--strikes", "80:120:10", "--out"])
            .arg(&out_path)
            .arg("--config")
            .arg(&config)
            .output()
            .unwrap();
        assert!(out.status.success());
        std::fs::read(&out_path).unwrap()
    };
    assert_eq!(sweep("a.csv"), sweep("b.csv"));
}

#[test]
fn figures_are_deterministic_and_respect_out_dir() {
    let dir = TempDir::new().unwrap();
    let render = |name: &str| {
        let out = bin()
            .args(["figures", "--name", "fig1", "--out", name])
            .env("JUMPHEDGE_OUT_DIR", dir.path())
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        // a relative --out lands inside the directory named by the env var
        std::fs::read(dir.path().join(name)).unwrap()
    };
    let first = render("fig_a.csv");
    assert!(first.starts_with(b"moneyness_k_over_s,"));
    assert_eq!(first, render("fig_b.csv"));
}

#[test]
fn hedge_emits_labeled_curves() {
    let dir = TempDir::new().unwrap();
    let config = write_config(&dir, FIG1_CONFIG);
    let out_path = dir.path().join("hedge.csv");
    let out = bin()
        .args(["hedge", "--out"])
        .arg(&out_path)
        .arg("--config")
        .arg(&config)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(&out_path).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "s,units_of_asset,wealth_in_asset,label");
    assert!(csv.contains("marginal_optimal"));
}

#[test]
fn implied_vol_round_trips_a_series_price() {
    let dir = TempDir::new().unwrap();
    let config = write_config(&dir, FIG1_CONFIG);
    let out = run(&["implied-vol", "--price", "9.82552066308077"], &config);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    let value: f64 = stdout.trim().strip_prefix("implied_vol = ").unwrap().parse().unwrap();
    assert!(value > 0.2 && value < 0.3, "implied vol {value}");
}

#[test]
fn verify_reports_all_checks_passing() {
    let dir = TempDir::new().unwrap();
    let out_path = dir.path().join("verify.csv");
    let out = bin().arg("verify").arg("--out").arg(&out_path).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(&out_path).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "check,expected,actual,tolerance,pass");
    assert!(csv.lines().skip(1).all(|l| l.ends_with("true")));
}

#[test]
fn usage_errors_exit_64() {
    let out = bin().arg("no-such-command").output().unwrap();
    assert_eq!(out.status.code(), Some(64));
    let out = bin().args(["price"]).output().unwrap(); // missing --config
    assert_eq!(out.status.code(), Some(64));
}

#[test]
fn runtime_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    // malformed config: negative volatility
    let config = write_config(&dir, "[market]\nmu = 0.1\nsigma = -0.2\n");
    let out = run(&["invest"], &config);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));

    let out = bin().args(["figures", "--name", "no-such-figure"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn help_and_version_exit_0() {
    assert_eq!(bin().arg("--help").output().unwrap().status.code(), Some(0));
    assert_eq!(bin().arg("--version").output().unwrap().status.code(), Some(0));
}
