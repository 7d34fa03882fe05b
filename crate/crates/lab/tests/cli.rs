use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn flatbeam(args: &[&str], outdir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flatbeam"))
        .args(args)
        .arg("--outdir")
        .arg(outdir)
        .output()
        .expect("binary runs")
}

fn run_dir(out: &Output) -> PathBuf {
    PathBuf::from(String::from_utf8_lossy(&out.stdout).trim())
}

fn summary(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn solve1d_regimes_and_validation() {
    let tmp = tempfile::tempdir().unwrap();
    let out = flatbeam(&["solve1d", "--j", "4/9", "--run", "flat"], tmp.path());
    assert!(out.status.success());
    let s = summary(&run_dir(&out));
    assert_eq!(s["regime"], "Flat");
    assert_eq!(s["xi"].as_f64(), Some(0.0));

    let out = flatbeam(&["solve1d", "--j", "16/9", "--run", "fb"], tmp.path());
    let s = summary(&run_dir(&out));
    assert_eq!(s["regime"], "FreeBoundary");
    assert_eq!(s["xi"].as_f64(), Some(0.5));

    let out = flatbeam(&["solve1d", "--j", "-1", "--run", "neg"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("j = -1"));
}

#[test]
fn unknown_keys_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.cfg");
    fs::write(&cfg, "j = 0.3\ncolour = blue\n").unwrap();
    let out = flatbeam(&["solve1d", "--config", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    fs::write(&cfg, "beta = 0.25\n").unwrap();
    let out = flatbeam(&["solve1d", "--config", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let out = flatbeam(&["solve1d", "--beta", "0.25"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn flags_override_config_and_echo_is_written() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.cfg");
    fs::write(&cfg, "# subcritical\nj = 0.3\nn = 50\n").unwrap();
    let out = flatbeam(&["solve1d", "--config", cfg.to_str().unwrap(), "--j", "0.2", "--run", "o"], tmp.path());
    assert!(out.status.success());
    let dir = run_dir(&out);
    let echo = fs::read_to_string(dir.join("config.echo")).unwrap();
    assert!(echo.contains("j=2.0000000000000001e-1"), "{echo}");
    assert!(echo.contains("n=50"));
    let rows = fs::read_to_string(dir.join("profile.csv")).unwrap();
    assert_eq!(rows.lines().count(), 52);
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let a = run_dir(&flatbeam(&["bifurcation", "--n_lambda", "40", "--run", "a"], tmp.path()));
    let b = run_dir(&flatbeam(&["bifurcation", "--n_lambda", "40", "--run", "b"], tmp.path()));
    for name in ["bifurcation.csv", "summary.json", "config.echo"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn default_run_directory_is_a_timestamp() {
    let tmp = tempfile::tempdir().unwrap();
    let out = flatbeam(&["solve1d"], tmp.path());
    assert!(out.status.success());
    let dir = run_dir(&out);
    assert_eq!(dir.parent().unwrap(), tmp.path().join("solve1d"));
    let name = dir.file_name().unwrap().to_string_lossy().to_string();
    assert!(name.ends_with('Z') && name.contains('T'), "{name}");
}

#[test]
fn bifurcation_below_first_eigenvalue_has_no_solutions() {
    let tmp = tempfile::tempdir().unwrap();
    let out = flatbeam(&["bifurcation", "--lambda_min", "0.1", "--lambda_max", "0.9", "--run", "low"], tmp.path());
    let csv = fs::read_to_string(run_dir(&out).join("bifurcation.csv")).unwrap();
    assert!(csv.lines().skip(1).all(|l| l.contains(",NoSolution,")));

    let out = flatbeam(&["bifurcation", "--run", "all"], tmp.path());
    let dir = run_dir(&out);
    let s = summary(&dir);
    assert!((s["lambda_star"].as_f64().unwrap() - 16.0 / 9.0).abs() < 1e-12);
    let mut rdr = csv::Reader::from_path(dir.join("bifurcation.csv")).unwrap();
    let norms: Vec<f64> = rdr
        .records()
        .map(|r| r.unwrap())
        .filter(|r| &r[2] == "UniquePositive")
        .map(|r| r[1].parse().unwrap())
        .collect();
    assert!(norms.len() > 10 && norms.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn solve2d_small_grid_passes_verification() {
    let tmp = tempfile::tempdir().unwrap();
    let out = flatbeam(&["solve2d", "--Nx", "65", "--Ny", "33", "--run", "s"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let dir = run_dir(&out);
    let v: Value = serde_json::from_str(&fs::read_to_string(dir.join("verification.json")).unwrap()).unwrap();
    assert_eq!(v["all_pass"], true, "{v}");
    for f in ["sub.csv", "u_min.csv", "u_max.csv", "exponent_fits.csv", "flux.csv", "config.echo"] {
        assert!(dir.join(f).exists(), "{f}");
    }
    let field = fs::read_to_string(dir.join("u_min.csv")).unwrap();
    assert_eq!(field.lines().next(), Some("i,j,x,y,u"));
    assert_eq!(field.lines().count(), 1 + 65 * 33);
}

#[test]
fn solve2d_robin_failure_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let out = flatbeam(&["solve2d", "--beta", "0.49", "--A", "0.3", "--Nx", "65", "--Ny", "33", "--run", "r"], tmp.path());
    assert_eq!(out.status.code(), Some(3));
    let s = summary(&run_dir(&out));
    assert_eq!(s["status"], "infeasible");
    assert!(s["feasibility_report"].as_str().unwrap().contains("Robin"));
}

#[test]
fn solve2d_without_current_is_harmonic() {
    let tmp = tempfile::tempdir().unwrap();
    let out = flatbeam(&["solve2d", "--A", "0", "--Nx", "65", "--Ny", "33", "--run", "h"], tmp.path());
    assert!(out.status.success());
    let v = summary(&run_dir(&out));
    for f in v["exponent_fits"].as_array().unwrap() {
        assert!((f["exponent"].as_f64().unwrap() - 1.0).abs() < 0.02, "{f}");
    }
}

#[test]
fn parabolic_rejects_large_step_with_safe_value() {
    let tmp = tempfile::tempdir().unwrap();
    let out = flatbeam(&["parabolic", "--Nx", "33", "--Ny", "17", "--dt", "0.1", "--run", "p"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("safe step"), "{err}");
}

#[test]
fn parabolic_writes_trajectory() {
    let tmp = tempfile::tempdir().unwrap();
    let out = flatbeam(&["parabolic", "--Nx", "33", "--Ny", "17", "--T", "0.2", "--stamps", "20", "--run", "p"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let dir = run_dir(&out);
    let tr = fs::read_to_string(dir.join("trajectory.csv")).unwrap();
    assert_eq!(tr.lines().next(), Some("t,distance_to_reference,weighted_positive_part_norm"));
    assert!(tr.lines().count() >= 21);
    let s = summary(&dir);
    assert_eq!(s["decay"]["bounded"], true);
    assert_eq!(s["distance_nonincreasing"], true);
}

#[test]
fn verify_commands() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["verify-sub", "--A", "5e-4", "--eps", "0.002", "--slack", "0.01", "--Nx", "129", "--Ny", "65"];
    let out = flatbeam(&[&args[..], &["--run", "s"]].concat(), tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let dir = run_dir(&out);
    let angular = fs::read_to_string(dir.join("angular.csv")).unwrap();
    assert_eq!(angular.lines().next(), Some("theta,U,U_prime,piece_id"));
    let ids: std::collections::BTreeSet<&str> =
        angular.lines().skip(1).map(|l| l.rsplit(',').next().unwrap()).collect();
    assert_eq!(ids.len(), 3);

    let out = flatbeam(&["verify-sub", "--A", "0.01", "--eps", "0.05", "--run", "p"], tmp.path());
    assert_eq!(out.status.code(), Some(3));

    let out = flatbeam(&["verify-super", "--beta", "0", "--Nx", "65", "--Ny", "33", "--run", "a"], tmp.path());
    assert!(out.status.success());
    let m = summary(&run_dir(&out))["robin_margin"].as_f64().unwrap();
    assert!((m - (4.0 / 3.0) / 3f64.sqrt()).abs() < 1e-9);
    let out = flatbeam(&["verify-super", "--beta", "0.49", "--Nx", "65", "--Ny", "33", "--run", "b"], tmp.path());
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn wings_table() {
    let tmp = tempfile::tempdir().unwrap();
    let out = flatbeam(&["wings", "--Nx", "33", "--Ny", "17", "--levels", "2", "--run", "w"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let dir = run_dir(&out);
    let table = fs::read_to_string(dir.join("wings.csv")).unwrap();
    assert_eq!(table.lines().count(), 1 + 2 * 2);
    let out = flatbeam(&["wings", "--betas", "0.25", "--run", "bad"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
}
