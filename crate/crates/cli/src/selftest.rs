//! Built-in numerical self-test. Every suite takes the exponential under
//! test so a deliberately broken one can be swapped in.

use std::fmt;

use twoframes::TfgShape;

use crate::checks::{self, ExpFn};

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub residual: f64,
    pub tolerance: f64,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.residual.is_finite() && self.residual <= self.tolerance
    }
}

impl fmt::Display for SuiteResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<22} residual {:.3e} (tolerance {:.1e})",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.residual,
            self.tolerance
        )
    }
}

/// Runs all suites. `scale` multiplies every tolerance.
pub fn run_selftest(exp: ExpFn, seed: u64, scale: f64) -> Vec<SuiteResult> {
    let suite = |name, residual, tolerance: f64| SuiteResult {
        name,
        residual,
        tolerance: tolerance * scale,
    };
    let embedding = checks::embedding_residual(TfgShape::new(3, 2, 2), 200, exp, seed).max(
        checks::embedding_residual(TfgShape::new(2, 1, 1), 200, exp, seed + 1),
    );
    vec![
        suite("exp_embedding", embedding, 1e-9),
        suite(
            "group_affine",
            checks::natural_group_affine_residual(50, seed + 2),
            1e-10,
        ),
        suite(
            "log_linearity",
            checks::log_linearity_residual(100, 0.5, exp, seed + 3),
            1e-9,
        ),
        suite(
            "error_recursions",
            checks::recursion_agreement_residual(50, seed + 4),
            1e-10,
        ),
        suite(
            "fd_jacobians",
            checks::jacobian_residuals(50, seed + 5).worst(),
            1e-5,
        ),
        suite(
            "noise_sampling",
            checks::noise_sampling_residual(20_000, seed + 6),
            1e-3,
        ),
        suite(
            "lever_arm_recursion",
            checks::lever_arm_recursion_residual(1000, seed + 7, true),
            1e-12,
        ),
    ]
}
