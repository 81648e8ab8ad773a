use std::path::Path;
use std::process::{Command, Output};

use quasi1d_experiments::{ExperimentReport, OutputFormat};

fn quasi1d(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quasi1d"))
        .args(args)
        .env_remove("QUASI1D_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn out_dir(dir: &Path) -> String {
    dir.to_str().unwrap().to_string()
}

#[test]
fn unknown_subcommand_prints_usage() {
    let out = quasi1d(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("Usage"), "{err}");
}

#[test]
fn missing_subcommand_is_a_usage_error() {
    assert_eq!(quasi1d(&[]).status.code(), Some(2));
}

#[test]
fn help_exits_cleanly() {
    let out = quasi1d(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    for cmd in ["swe-convergence", "swe-wellbalanced", "swe-channel", "euler-ec", "euler-convergence", "euler-nozzle", "verify"] {
        assert!(text.contains(cmd), "{cmd} missing from help");
    }
}

#[test]
fn bad_values_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = out_dir(dir.path());
    for args in [
        vec!["euler-ec", "--flux", "roe"],
        vec!["euler-ec", "--degree", "x"],
        vec!["euler-ec", "--elements", "0", "--output", &o],
        vec!["swe-convergence", "--elements", "4,6", "--output", &o],
        vec!["euler-nozzle", "--pressure-ratio", "0.2", "--output", &o],
        vec!["swe-wellbalanced", "--t-final", "-1", "--output", &o],
        vec!["verify", "--format", "xml"],
    ] {
        assert_eq!(quasi1d(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn solver_failure_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    // Fixed rk4 steps at cfl 1 are unstable for N = 7 and drive the pressure negative.
    let out = quasi1d(&[
        "euler-ec", "--integrator", "rk4", "--cfl", "1", "--elements", "64", "--degree", "7", "--t-final", "2",
        "--output", &out_dir(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn csv_output_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = quasi1d(&[
        "swe-wellbalanced", "--elements", "8", "--t-final", "0.01", "--output", &out_dir(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = ExperimentReport::read(dir.path(), "swe-wellbalanced-discontinuous", OutputFormat::Csv).unwrap();
    let profile = report.dataset("profile").unwrap();
    assert_eq!(profile.rows.len(), 8 * 4);
    assert_eq!(profile.columns[0], "x");

    let text = std::fs::read_to_string(dir.path().join("swe-wellbalanced-discontinuous_profile.csv")).unwrap();
    let field = text.lines().nth(2).unwrap().split(',').nth(1).unwrap();
    let mantissa = field.split(['e', 'E']).next().unwrap().trim_start_matches('-').replace('.', "");
    assert!(mantissa.len() >= 15, "{field}");
}

#[test]
fn json_output_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = quasi1d(&[
        "swe-convergence", "--degree", "1", "--elements", "4,8", "--t-final", "0.01", "--format", "json",
        "--output", &out_dir(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = ExperimentReport::read(dir.path(), "swe-convergence", OutputFormat::Json).unwrap();
    let table = report.table(1).unwrap();
    assert_eq!(table.rows.iter().map(|r| r.elements).collect::<Vec<_>>(), vec![4, 8]);
    assert!(table.rows[1].rate.is_some());
}

#[test]
fn config_file_overrides_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# short run\nelements = 6\nt_final = 0.02\nformat = json\n").unwrap();
    let out = quasi1d(&[
        "euler-ec", "--elements", "40", "--config", cfg.to_str().unwrap(), "--output", &out_dir(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = ExperimentReport::read(dir.path(), "euler-ec", OutputFormat::Json).unwrap();
    assert_eq!(report.config["elements"], "6");
    assert_eq!(report.config["t_final"], "0.02");
}

#[test]
fn broken_config_file_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "elements 6\n").unwrap();
    assert_eq!(quasi1d(&["euler-ec", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(quasi1d(&["euler-ec", "--config", "/nonexistent/cfg"]).status.code(), Some(2));
}

#[test]
fn euler_ec_writes_entropy_series() {
    let dir = tempfile::tempdir().unwrap();
    let out = quasi1d(&["euler-ec", "--elements", "8", "--t-final", "0.05", "--output", &out_dir(dir.path())]);
    assert_eq!(out.status.code(), Some(0));
    let report = ExperimentReport::read(dir.path(), "euler-ec", OutputFormat::Csv).unwrap();
    let series = report.dataset("entropy").unwrap();
    let t = series.column("t").unwrap();
    assert!(t.windows(2).all(|w| w[1] > w[0]));
    assert!((t[t.len() - 1] - 0.05).abs() < 1e-12);
    assert!(series.column("entropy_residual").unwrap().iter().all(|r| r.abs() < 1e-10));
}

#[test]
fn verify_prints_residuals_and_honours_seed() {
    let dir = tempfile::tempdir().unwrap();
    let o = out_dir(dir.path());
    let run = |seed: Option<&str>, extra: &[&str]| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_quasi1d"));
        cmd.args(["verify", "--pairs", "200", "--output", &o]).args(extra).env_remove("QUASI1D_SEED");
        if let Some(s) = seed {
            cmd.env("QUASI1D_SEED", s);
        }
        cmd.output().unwrap()
    };
    let default = run(None, &[]);
    assert_eq!(default.status.code(), Some(0));
    assert!(stdout(&default).contains("seed 0"));
    assert!(stdout(&default).contains("sbp_identities"));

    let a = run(Some("17"), &[]);
    let b = run(Some("17"), &[]);
    assert!(stdout(&a).contains("seed 17"));
    assert_eq!(stdout(&a), stdout(&b));
    assert_ne!(stdout(&a), stdout(&default));

    let flag = run(Some("17"), &["--seed", "3"]);
    assert!(stdout(&flag).contains("seed 3"));
    assert_eq!(run(Some("not-a-number"), &[]).status.code(), Some(2));
}
