//! Structural validation of systems: commutation of the vector matrices,
//! frame classification and the group-affine residual.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use twoframes::scenarios::inertial::{
    build_inertial_nav, ImuSample, InertialNavConfig, Trajectory,
};
use twoframes::scenarios::{lever_arm, slammot};
use twoframes::system_model::{
    check_commutation, check_group_affine, check_natural_frame, NaturalFrameClass,
};
use twoframes::{TfgError, TwoFramesSystem};

use crate::config::{Config, ScenarioId};

/// Group-affine residual below which a system counts as natural.
pub const GROUP_AFFINE_TOLERANCE: f64 = 1e-10;

/// What a scenario is expected to be.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Claim {
    Natural,
    NotNatural,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MatrixCheck {
    pub name: String,
    pub commutes: bool,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SystemReport {
    pub scenario: ScenarioId,
    pub shape: String,
    pub matrices: Vec<MatrixCheck>,
    pub frame: NaturalFrameClass,
    pub frame_note: String,
    pub group_affine_residual: f64,
    pub claim: Claim,
}

impl SystemReport {
    pub fn is_natural(&self) -> bool {
        self.matrices.iter().all(|m| m.commutes)
            && self.frame != NaturalFrameClass::NotNatural
            && self.group_affine_residual < GROUP_AFFINE_TOLERANCE
    }

    /// The measured structure agrees with the claim.
    pub fn passed(&self) -> bool {
        match self.claim {
            Claim::Natural => self.is_natural(),
            Claim::NotNatural => !self.is_natural(),
        }
    }
}

impl fmt::Display for SystemReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.is_natural() {
            "group-affine"
        } else {
            "not group-affine"
        };
        write!(
            f,
            "{}: {} frame {}",
            self.scenario.name(),
            self.shape,
            self.frame
        )?;
        if !self.frame_note.is_empty() {
            write!(f, " ({})", self.frame_note)?;
        }
        writeln!(
            f,
            " / {verdict}, residual {:.3e} [{}]",
            self.group_affine_residual,
            if self.passed() { "ok" } else { "FAIL" }
        )?;
        for m in &self.matrices {
            writeln!(
                f,
                "  {:<12} {} (residual {:.3e})",
                m.name,
                if m.commutes {
                    "commutes"
                } else {
                    "does not commute"
                },
                m.residual
            )?;
        }
        Ok(())
    }
}

pub fn validate_system(
    scenario: ScenarioId,
    system: &TwoFramesSystem<f64>,
    claim: Claim,
    seed: u64,
) -> Result<SystemReport, TfgError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shape = system.shape;
    let step = system.step(1);
    let mut named: Vec<(String, DMatrix<f64>)> = vec![
        ("F".into(), step.vector.f.clone()),
        ("C".into(), step.vector.c.clone()),
        ("Phi".into(), step.vector.phi.clone()),
        ("Gamma".into(), step.vector.gamma.clone()),
    ];
    for (i, o) in system.outputs.iter().enumerate() {
        named.push((format!("H^x[{i}]"), o.h_fixed.clone()));
        named.push((format!("H^X[{i}]"), o.h_body.clone()));
    }
    let mut matrices = Vec::new();
    for (name, m) in named {
        if m.is_empty() {
            continue;
        }
        let r = check_commutation(&m, shape.d, 20, &mut rng)?;
        matrices.push(MatrixCheck {
            name,
            commutes: r.commutes,
            residual: r.residual,
        });
    }
    let frame = check_natural_frame(&step.frame, shape, 20, &mut rng);
    let frame_note = match &step.frame {
        twoframes::FrameDynamics::Generic(map) => map.describe(),
        _ => String::new(),
    };
    let residual = check_group_affine(|c| step.apply(c), shape, 50, 1.0, &mut rng);
    Ok(SystemReport {
        scenario,
        shape: format!("SO({})^+_{{{},{}}}", shape.d, shape.n1, shape.n2),
        matrices,
        frame: frame.class,
        frame_note,
        group_affine_residual: residual,
        claim,
    })
}

fn inertial_system(cfg: &InertialNavConfig) -> TwoFramesSystem<f64> {
    let short = InertialNavConfig {
        duration_s: cfg.dt_s * 10.0,
        ..cfg.clone()
    };
    let traj = Trajectory::generate(&short);
    let mut imu: Vec<ImuSample> = traj
        .rates
        .iter()
        .zip(&traj.specific_forces)
        .map(|(w, f)| ImuSample {
            gyro: *w,
            accel: *f,
        })
        .collect();
    // Step 0 carries no reading; reuse the first one.
    imu[0] = imu[1];
    build_inertial_nav(cfg, Arc::new(imu))
}

/// Builds and checks the selected scenario, or every built-in one.
pub fn run_validate(cfg: &Config, seed: u64) -> Result<Vec<SystemReport>, TfgError> {
    let selected: Vec<ScenarioId> = match cfg.scenario {
        Some(s) => vec![s],
        None => vec![
            ScenarioId::InertialNav,
            ScenarioId::LeverArmCar,
            ScenarioId::Slammot,
        ],
    };
    selected
        .into_iter()
        .map(|s| {
            let (system, claim) = match s {
                // A turning craft with body-frame biases is never natural.
                ScenarioId::InertialNav => (inertial_system(&cfg.inertial_nav), Claim::NotNatural),
                ScenarioId::LeverArmCar => (
                    lever_arm::build_lever_arm_car(Arc::new(lever_arm::odometry_profile(
                        &cfg.lever_arm_car,
                    ))),
                    Claim::Natural,
                ),
                ScenarioId::Slammot => (
                    slammot::build_slammot(
                        &cfg.slammot,
                        Arc::new(slammot::input_profile(&cfg.slammot)),
                    ),
                    Claim::Natural,
                ),
                ScenarioId::Custom => {
                    let custom = cfg
                        .custom
                        .as_ref()
                        .ok_or_else(|| TfgError::Config("missing [custom] table".into()))?;
                    (custom.build()?, Claim::Natural)
                }
            };
            validate_system(s, &system, claim, seed)
        })
        .collect()
}
