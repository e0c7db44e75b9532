//! SLAM with moving-object tracking.
//!
//! Fixed-frame vector `x = (v, p, l¹…l^K, q¹…q^I, c¹…c^I [, a¹…a^I])`:
//! velocity, position, static landmarks, moving features and their
//! velocities (and accelerations under the Singer model). No body vectors.
//!
//! ```text
//! v ← v + Δt g + R (Δt a^v)      p ← p + Δt v
//! q ← q + Δt c                   c ← c [+ Δt a]      a ← (1 − Δt γ) a
//! R ← R Ω
//! ```
//!
//! Every landmark or feature is observed in the body frame.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Result, TfgError};
use crate::lie::{exp_rot, Rotation};
use crate::system_model::{
    Frame, FrameDynamics, OutputModel, StepDynamics, TwoFramesSystem, VectorDynamics,
};
use crate::tfg::TfgShape;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SlammotConfig {
    pub dt_s: f64,
    pub steps: usize,
    pub static_landmarks: usize,
    pub moving_features: usize,
    pub singer: bool,
    pub singer_decay_per_s: f64,
    pub gravity_m_s2: [f64; 3],
}

impl Default for SlammotConfig {
    fn default() -> Self {
        Self {
            dt_s: 0.05,
            steps: 1000,
            static_landmarks: 3,
            moving_features: 2,
            singer: false,
            singer_decay_per_s: 0.1,
            gravity_m_s2: [0.0, 0.0, -9.81],
        }
    }
}

impl SlammotConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt_s > 0.0) || self.steps == 0 {
            return Err(TfgError::Config(
                "dt_s must be positive and steps at least 1".into(),
            ));
        }
        if !(self.singer_decay_per_s >= 0.0) {
            return Err(TfgError::Config(
                "singer_decay_per_s must be non-negative".into(),
            ));
        }
        Ok(())
    }

    pub fn layout(&self) -> SlammotLayout {
        SlammotLayout {
            landmarks: self.static_landmarks,
            features: self.moving_features,
            singer: self.singer,
        }
    }
}

/// Block positions inside the fixed-frame vector (indices count 3-vectors).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SlammotLayout {
    pub landmarks: usize,
    pub features: usize,
    pub singer: bool,
}

impl SlammotLayout {
    pub const VEL: usize = 0;
    pub const POS: usize = 1;

    pub fn landmark(&self, k: usize) -> usize {
        2 + k
    }

    pub fn feature(&self, i: usize) -> usize {
        2 + self.landmarks + i
    }

    pub fn feature_velocity(&self, i: usize) -> usize {
        2 + self.landmarks + self.features + i
    }

    pub fn feature_acceleration(&self, i: usize) -> Option<usize> {
        self.singer
            .then(|| 2 + self.landmarks + 2 * self.features + i)
    }

    pub fn blocks(&self) -> usize {
        2 + self.landmarks + self.features * if self.singer { 3 } else { 2 }
    }

    pub fn shape(&self) -> TfgShape {
        TfgShape::new(3, self.blocks(), 0)
    }
}

/// IMU reading of one step: body rate and specific force.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlammotInput {
    pub gyro: Vector3<f64>,
    pub accel: Vector3<f64>,
}

fn block_matrix(coef: &DMatrix<f64>) -> DMatrix<f64> {
    coef.kronecker(&DMatrix::identity(3, 3))
}

pub fn slammot_step(cfg: &SlammotConfig, input: &SlammotInput) -> StepDynamics<f64> {
    let lay = cfg.layout();
    let n = lay.blocks();
    let dt = cfg.dt_s;
    let mut coef = DMatrix::identity(n, n);
    coef[(SlammotLayout::POS, SlammotLayout::VEL)] = dt;
    for i in 0..lay.features {
        coef[(lay.feature(i), lay.feature_velocity(i))] = dt;
        if let Some(a) = lay.feature_acceleration(i) {
            coef[(lay.feature_velocity(i), a)] = dt;
            coef[(a, a)] = 1.0 - dt * cfg.singer_decay_per_s;
        }
    }
    let mut fixed_drift = DVector::zeros(3 * n);
    fixed_drift
        .rows_mut(0, 3)
        .copy_from(&(Vector3::from(cfg.gravity_m_s2) * dt));
    let mut body_input = DVector::zeros(3 * n);
    body_input.rows_mut(0, 3).copy_from(&(input.accel * dt));
    StepDynamics {
        vector: VectorDynamics {
            f: block_matrix(&coef),
            c: DMatrix::zeros(3 * n, 0),
            fixed_drift,
            body_input,
            phi: DMatrix::zeros(0, 0),
            gamma: DMatrix::zeros(0, 3 * n),
            body_drift: DVector::zeros(0),
            fixed_input: DVector::zeros(0),
        },
        frame: FrameDynamics::Natural {
            o: Rotation::identity(3),
            omega: exp_rot(&DVector::from_column_slice((input.gyro * dt).as_slice())),
        },
    }
}

/// Body-frame relative position `Rᵀ(x_target − p)` of a block.
pub fn relative_output(lay: &SlammotLayout, target: usize) -> OutputModel<f64> {
    let n = lay.blocks();
    let mut coef = DMatrix::zeros(1, n);
    coef[(0, SlammotLayout::POS)] = 1.0;
    coef[(0, target)] = -1.0;
    OutputModel {
        frame: Frame::Body,
        h_fixed: block_matrix(&coef),
        h_body: DMatrix::zeros(3, 0),
        offset: DVector::zeros(3),
    }
}

/// One output per static landmark followed by one per moving feature.
pub fn slammot_outputs(lay: &SlammotLayout) -> Vec<OutputModel<f64>> {
    (0..lay.landmarks)
        .map(|k| relative_output(lay, lay.landmark(k)))
        .chain((0..lay.features).map(|i| relative_output(lay, lay.feature(i))))
        .collect()
}

/// Deterministic excitation: slow turn with a small oscillating acceleration.
/// The specific force compensates gravity along the attitude reached from
/// `R = I`, so a trajectory started level stays bounded.
pub fn input_profile(cfg: &SlammotConfig) -> Vec<SlammotInput> {
    let g = Vector3::from(cfg.gravity_m_s2);
    let mut rot = Rotation::<f64>::identity(3);
    (0..=cfg.steps)
        .map(|n| {
            let t = n as f64 * cfg.dt_s;
            let gyro = Vector3::new(0.05 * (0.7 * t).sin(), 0.03 * (0.4 * t).cos(), 0.1);
            let acc = Vector3::new(0.5 * (0.3 * t).sin(), 0.2 * (0.5 * t).cos(), 0.0);
            let world = DVector::from_column_slice((acc - g).as_slice());
            let body = rot.inverse().rotate(&world);
            if n > 0 {
                rot = rot.compose(&exp_rot(&DVector::from_column_slice(
                    (gyro * cfg.dt_s).as_slice(),
                )));
            }
            SlammotInput {
                gyro,
                accel: Vector3::new(body[0], body[1], body[2]),
            }
        })
        .collect()
}

pub fn build_slammot(cfg: &SlammotConfig, inputs: Arc<Vec<SlammotInput>>) -> TwoFramesSystem<f64> {
    let lay = cfg.layout();
    let cfg = cfg.clone();
    TwoFramesSystem {
        shape: lay.shape(),
        dynamics: Arc::new(move |n| {
            let input = inputs
                .get(n)
                .or_else(|| inputs.last())
                .copied()
                .unwrap_or(SlammotInput {
                    gyro: Vector3::zeros(),
                    accel: Vector3::zeros(),
                });
            slammot_step(&cfg, &input)
        }),
        outputs: slammot_outputs(&lay),
    }
}
