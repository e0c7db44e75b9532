//! Planar car with wheel odometry and a GNSS antenna mounted at an unknown
//! lever arm.
//!
//! State `(θ, x, X)` on `SO(2)^+_{1,1}`: heading, position of the reference
//! point and lever arm in the body frame.
//!
//! ```text
//! x ← x + ρ(θ) u      θ ← θ + ω      X ← X
//! y = x + ρ(θ) X
//! ```

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Rotation2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Result, TfgError};
use crate::filter::NoiseModel;
use crate::lie::{exp_rot, Rotation};
use crate::system_model::{
    Frame, FrameDynamics, OutputModel, StepDynamics, TwoFramesSystem, VectorDynamics,
};
use crate::tfg::{TfgElement, TfgShape};

pub const SHAPE: TfgShape = TfgShape { d: 2, n1: 1, n2: 1 };

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LeverArmConfig {
    pub dt_s: f64,
    pub steps: usize,
    pub speed_m_s: f64,
    pub yaw_rate_rad_s: f64,
    pub yaw_rate_period_s: f64,
    pub lever_arm_m: [f64; 2],
    pub sigma_odometry_m: f64,
    pub sigma_heading_rad: f64,
    pub sigma_gnss_m: f64,
}

impl Default for LeverArmConfig {
    fn default() -> Self {
        Self {
            dt_s: 0.1,
            steps: 1000,
            speed_m_s: 10.0,
            yaw_rate_rad_s: 0.2,
            yaw_rate_period_s: 20.0,
            lever_arm_m: [1.5, 0.5],
            sigma_odometry_m: 0.05,
            sigma_heading_rad: 0.005,
            sigma_gnss_m: 1.0,
        }
    }
}

impl LeverArmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt_s > 0.0) || self.steps == 0 {
            return Err(TfgError::Config(
                "dt_s must be positive and steps at least 1".into(),
            ));
        }
        if [
            self.sigma_odometry_m,
            self.sigma_heading_rad,
            self.sigma_gnss_m,
        ]
        .iter()
        .any(|s| !(*s >= 0.0))
        {
            return Err(TfgError::Config(
                "standard deviations must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// Odometry of one step: body-frame displacement and heading increment.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OdometrySample {
    pub shift: Vector2<f64>,
    pub turn: f64,
}

/// Deterministic odometry: constant speed with a sinusoidal yaw rate.
pub fn odometry_profile(cfg: &LeverArmConfig) -> Vec<OdometrySample> {
    let w = std::f64::consts::TAU / cfg.yaw_rate_period_s;
    (0..=cfg.steps)
        .map(|n| OdometrySample {
            shift: Vector2::new(cfg.speed_m_s * cfg.dt_s, 0.0),
            turn: cfg.yaw_rate_rad_s * (w * n as f64 * cfg.dt_s).sin() * cfg.dt_s,
        })
        .collect()
}

pub fn lever_arm_step(odo: &OdometrySample) -> StepDynamics<f64> {
    let i2 = DMatrix::identity(2, 2);
    StepDynamics {
        vector: VectorDynamics {
            f: i2.clone(),
            c: DMatrix::zeros(2, 2),
            fixed_drift: DVector::zeros(2),
            body_input: DVector::from_column_slice(odo.shift.as_slice()),
            phi: i2,
            gamma: DMatrix::zeros(2, 2),
            body_drift: DVector::zeros(2),
            fixed_input: DVector::zeros(2),
        },
        frame: FrameDynamics::Natural {
            o: Rotation::identity(2),
            omega: exp_rot(&DVector::from_element(1, odo.turn)),
        },
    }
}

/// Antenna position in the fixed frame: `H^x = H^X = I`, `B = 0`.
pub fn gnss_output() -> OutputModel<f64> {
    OutputModel {
        frame: Frame::Fixed,
        h_fixed: DMatrix::identity(2, 2),
        h_body: DMatrix::identity(2, 2),
        offset: DVector::zeros(2),
    }
}

pub fn build_lever_arm_car(odometry: Arc<Vec<OdometrySample>>) -> TwoFramesSystem<f64> {
    TwoFramesSystem {
        shape: SHAPE,
        dynamics: Arc::new(move |n| {
            let odo = odometry
                .get(n)
                .or_else(|| odometry.last())
                .copied()
                .unwrap_or(OdometrySample {
                    shift: Vector2::zeros(),
                    turn: 0.0,
                });
            lever_arm_step(&odo)
        }),
        outputs: vec![gnss_output()],
    }
}

pub fn lever_arm_noise(cfg: &LeverArmConfig) -> NoiseModel<f64> {
    NoiseModel {
        q_rot: DMatrix::from_element(1, 1, cfg.sigma_heading_rad.powi(2)),
        q_fixed: DMatrix::identity(2, 2) * cfg.sigma_odometry_m.powi(2),
        q_body: DMatrix::zeros(2, 2),
        g_fixed: Some(Arc::new(|chi: &TfgElement<f64>| chi.rot.matrix().clone())),
        g_body: None,
        obs: DMatrix::identity(2, 2) * cfg.sigma_gnss_m.powi(2),
    }
}

/// Left-invariant error `(E^θ, E^x, E^X)` written out by hand.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HandError {
    pub theta: f64,
    pub x: Vector2<f64>,
    pub lever: Vector2<f64>,
}

fn rho(a: f64) -> Rotation2<f64> {
    Rotation2::new(a)
}

impl HandError {
    /// Error between an estimate and the truth, both `(θ, x, X)`:
    /// `(θ − θ̂, ρ(θ̂)ᵀ (x − x̂), X − ρ(θ̂ − θ) X̂)`.
    pub fn between(
        est: (f64, Vector2<f64>, Vector2<f64>),
        truth: (f64, Vector2<f64>, Vector2<f64>),
    ) -> Self {
        Self {
            theta: truth.0 - est.0,
            x: rho(-est.0) * (truth.1 - est.1),
            lever: truth.2 - rho(est.0 - truth.0) * est.2,
        }
    }

    /// `E^x ← ρ(−ω) [E^x + (ρ(E^θ) − I) u]`; heading and lever-arm errors
    /// are unchanged.
    pub fn propagate(&self, odo: &OdometrySample) -> Self {
        let shifted = self.x + rho(self.theta) * odo.shift - odo.shift;
        Self {
            theta: self.theta,
            x: rho(-odo.turn) * shifted,
            lever: self.lever,
        }
    }

    /// Correction `L = (l^θ, L^x, L^X)` applied on the right of the estimate.
    pub fn update(&self, l_theta: f64, l_x: &Vector2<f64>, l_lever: &Vector2<f64>) -> Self {
        Self {
            theta: self.theta - l_theta,
            x: rho(-l_theta) * (self.x - l_x),
            lever: self.lever - rho(l_theta - self.theta) * l_lever,
        }
    }

    /// Innovation `E^x + ρ(E^θ) E^X`.
    pub fn innovation(&self) -> Vector2<f64> {
        self.x + rho(self.theta) * self.lever
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_lever_arm_straight_drive_reads_position() {
        let chi = TfgElement {
            rot: Rotation::identity(2),
            fixed: DVector::from_vec(vec![3.0, -1.0]),
            body: DVector::zeros(2),
        };
        let odo = OdometrySample {
            shift: Vector2::new(1.0, 0.0),
            turn: 0.0,
        };
        let next = lever_arm_step(&odo).apply(&chi);
        let y = gnss_output().evaluate(&next);
        assert_eq!(y, DVector::from_vec(vec![4.0, -1.0]));
    }
}
