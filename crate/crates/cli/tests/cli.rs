use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use twoframes::lie::nu;
use twoframes::tfg::exp_tfg;
use twoframes::{TfgElement, TfgShape, TfgTangent};
use twoframes_cli::bench::{RunManifest, CSV_HEADER, MANIFEST_FILE};
use twoframes_cli::checks::{embedding_residual, library_exp, log_linearity_residual};
use twoframes_cli::config::Config;
use twoframes_cli::selftest::run_selftest;

fn twoframes(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twoframes"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.display().to_string()
}

const SMALL: &str = "[monte_carlo]\nruns = 3\nseed = 7\n[inertial_nav]\nduration_s = 2.0\n";

#[test]
fn validate_default_systems_exit_zero() {
    let out = twoframes(&["validate"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(
        text.contains("lever_arm_car") && text.contains("slammot") && text.contains("inertial_nav")
    );
}

#[test]
fn empty_custom_system_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.toml",
        "scenario = \"custom\"\n[custom]\nd = 3\nn1 = 0\nn2 = 0\n",
    );
    assert_eq!(
        twoframes(&["--config", &cfg, "validate"]).status.code(),
        Some(3)
    );
}

#[test]
fn unknown_key_and_missing_file_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "[monte_carlo]\nrunz = 3\n");
    assert_eq!(
        twoframes(&["--config", &cfg, "validate"]).status.code(),
        Some(3)
    );
    assert_eq!(
        twoframes(&["--config", "/nonexistent.toml", "validate"])
            .status
            .code(),
        Some(3)
    );
    assert_eq!(twoframes(&["--runs", "0", "bench"]).status.code(), Some(3));
    assert_eq!(twoframes(&["frobnicate"]).status.code(), Some(3));
}

#[test]
fn print_config_round_trips() {
    let out = twoframes(&["--seed", "42", "--print-config", "validate"]);
    assert_eq!(out.status.code(), Some(0));
    let cfg = Config::from_toml(&String::from_utf8(out.stdout).unwrap()).unwrap();
    let mut expected = Config::default();
    expected.monte_carlo.seed = 42;
    assert_eq!(cfg, expected);
}

#[test]
fn bench_writes_headers_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", SMALL);
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    for out in [&out_a, &out_b] {
        let o = twoframes(&[
            "--config",
            &cfg,
            "--out",
            out.to_str().unwrap(),
            "--filters",
            "tfg,mekf",
            "bench",
        ]);
        assert_eq!(
            o.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
    for name in ["tfg.csv", "mekf.csv", "summary.csv"] {
        let a = fs::read(out_a.join(name)).unwrap();
        assert_eq!(a, fs::read(out_b.join(name)).unwrap(), "{name}");
    }
    assert!(!out_a.join("imperfect.csv").exists());
    let text = fs::read_to_string(out_a.join("tfg.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
    // 2 s at 0.1 s spacing plus t = 0.
    assert_eq!(lines.count(), 21);
    let manifest = RunManifest::load(&out_a.join(MANIFEST_FILE)).unwrap();
    assert_eq!(manifest.seed, 7);
    assert_eq!(manifest.config.monte_carlo.runs, 3);
}

#[test]
fn bench_manifest_rerun_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", SMALL);
    let out = dir.path().join("run");
    assert_eq!(
        twoframes(&["--config", &cfg, "--out", out.to_str().unwrap(), "bench"])
            .status
            .code(),
        Some(0)
    );
    let first = fs::read(out.join("imperfect.csv")).unwrap();
    let manifest = out.join(MANIFEST_FILE);
    assert_eq!(
        twoframes(&["bench", "--manifest", manifest.to_str().unwrap()])
            .status
            .code(),
        Some(0)
    );
    assert_eq!(first, fs::read(out.join("imperfect.csv")).unwrap());
}

#[test]
fn selftest_passes() {
    assert!(run_selftest(library_exp, 11, 1.0)
        .iter()
        .all(|r| r.passed()));
}

// Exponential with the sign of the body-vector nu flipped.
fn mutated_exp(xi: &TfgTangent<f64>) -> TfgElement<f64> {
    let mut e = exp_tfg(xi);
    let plus = nu(&xi.rot);
    let d = plus.nrows();
    for j in 0..xi.body.len() / d {
        let v = xi.body.rows(j * d, d).into_owned();
        e.body.rows_mut(j * d, d).copy_from(&(&plus * v));
    }
    e
}

#[test]
fn mutated_exponential_fails_the_exp_suite() {
    assert!(embedding_residual(TfgShape::new(3, 2, 2), 50, mutated_exp, 3) > 1e-3);
    assert!(embedding_residual(TfgShape::new(3, 2, 2), 50, library_exp, 3) < 1e-9);
    let results = run_selftest(mutated_exp, 3, 1.0);
    let exp_suite = results.iter().find(|r| r.name == "exp_embedding").unwrap();
    assert!(!exp_suite.passed());
    assert!(log_linearity_residual(10, 0.5, library_exp, 5) < 1e-9);
}
