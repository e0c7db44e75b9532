//! "Imperfect" IEKF: right-invariant filter on `SE₂(3)` for `(R, v, p)` with
//! plain additive bias errors.
//!
//! The trajectory part reuses the two-frames machinery on `SO(3)^+_{2,0}`;
//! the bias channel is appended to the error state.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Vector3};

use crate::error::Result;
use crate::filter::{self, block_diag, symmetrize, NoiseModel};
use crate::lie::{right_jacobian, skew};
use crate::scenarios::inertial::{
    ImuSample, LandmarkObs, NavFilter, NavPrior, NavState, NavTuning,
};
use crate::system_model::{stack_outputs, ErrorSide, Frame, OutputModel};
use crate::tfg::{exp_tfg, TfgElement, TfgShape, TfgTangent};

pub const TRAJECTORY_SHAPE: TfgShape = TfgShape { d: 3, n1: 2, n2: 0 };

fn sk(v: &[f64]) -> DMatrix<f64> {
    skew(v)
}

/// State of the imperfect IEKF.
#[derive(Clone, Debug)]
pub struct ImperfectIekf {
    /// `(R, (v, p))` on `SO(3)^+_{2,0}`.
    pub traj: TfgElement<f64>,
    pub gyro_bias: Vector3<f64>,
    pub accel_bias: Vector3<f64>,
    /// Covariance of `(ξ^R, ξ^v, ξ^p, δb^ω, δb^a)`.
    pub p: DMatrix<f64>,
    pub tuning: NavTuning,
    noise: NoiseModel<f64>,
}

fn trajectory_noise(t: &NavTuning) -> NoiseModel<f64> {
    let dt = t.dt;
    NoiseModel {
        q_rot: DMatrix::identity(3, 3) * (t.sigma_gyro * dt).powi(2),
        q_fixed: DMatrix::identity(3, 3) * t.sigma_accel.powi(2),
        q_body: DMatrix::zeros(0, 0),
        g_fixed: Some(Arc::new(move |chi: &TfgElement<f64>| {
            let mut g = DMatrix::zeros(6, 3);
            g.view_mut((0, 0), (3, 3))
                .copy_from(&(chi.rot.matrix() * -dt));
            g
        })),
        g_body: None,
        obs: DMatrix::identity(3, 3) * t.sigma_landmark.powi(2),
    }
}

fn landmark_output(landmark: &Vector3<f64>) -> OutputModel<f64> {
    let mut h_fixed = DMatrix::zeros(3, 6);
    h_fixed.view_mut((0, 3), (3, 3)).fill_with_identity();
    OutputModel {
        frame: Frame::Body,
        h_fixed,
        h_body: DMatrix::zeros(3, 0),
        offset: DVector::from_column_slice(landmark.as_slice()),
    }
}

impl ImperfectIekf {
    pub fn new(prior: &NavPrior, tuning: &NavTuning) -> Self {
        let full = prior.est.to_element();
        let traj = TfgElement {
            rot: full.rot.clone(),
            fixed: full.fixed.clone(),
            body: DVector::zeros(0),
        };
        let mut l = DMatrix::identity(15, 15);
        l.view_mut((0, 0), (9, 9))
            .copy_from(&filter::classical_to_invariant(&traj, ErrorSide::Right));
        let p_bar = prior.classical_covariance();
        Self {
            traj,
            gyro_bias: prior.est.gyro_bias,
            accel_bias: prior.est.accel_bias,
            p: symmetrize(&(&l * p_bar * l.transpose())),
            tuning: tuning.clone(),
            noise: trajectory_noise(tuning),
        }
    }

    /// Error transition `A^s A^v` of one step.
    ///
    /// ```text
    /// ξ^R' = ξ^R + M1 δb^ω
    /// ξ^v' = ξ^v + Δt (g)× ξ^R + Δt R̂ δb^a + (v̂')× M1 δb^ω
    /// ξ^p' = ξ^p + Δt ξ^v + (p̂')× M1 δb^ω
    /// ```
    /// with `M1 = Δt R̂' J̄(Δt μ̂)`.
    pub fn transition(
        &self,
        pre: &TfgElement<f64>,
        post: &TfgElement<f64>,
        imu: &ImuSample,
    ) -> DMatrix<f64> {
        let dt = self.tuning.dt;
        let mu = DVector::from_column_slice(((imu.gyro + self.gyro_bias) * dt).as_slice());
        let i3 = DMatrix::<f64>::identity(3, 3);
        let g = self.tuning.gravity;
        let mut a_v = DMatrix::identity(15, 15);
        a_v.view_mut((3, 0), (3, 3))
            .copy_from(&(sk(g.as_slice()) * dt));
        a_v.view_mut((3, 12), (3, 3))
            .copy_from(&(pre.rot.matrix() * dt));
        a_v.view_mut((6, 3), (3, 3)).copy_from(&(&i3 * dt));
        let m1 = post.rot.matrix() * right_jacobian(&mu) * dt;
        let mut a_s = DMatrix::identity(15, 15);
        let (v, p) = (post.fixed.rows(0, 3), post.fixed.rows(3, 3));
        a_s.view_mut((0, 9), (3, 3)).copy_from(&m1);
        a_s.view_mut((3, 9), (3, 3))
            .copy_from(&(sk(&[v[0], v[1], v[2]]) * &m1));
        a_s.view_mut((6, 9), (3, 3))
            .copy_from(&(sk(&[p[0], p[1], p[2]]) * &m1));
        a_s * a_v
    }

    fn step(&self, imu: &ImuSample) -> TfgElement<f64> {
        let dt = self.tuning.dt;
        let r = self.traj.rot.matrix();
        let acc = DVector::from_column_slice((imu.accel + self.accel_bias).as_slice());
        let g = DVector::from_column_slice(self.tuning.gravity.as_slice());
        let v = self.traj.fixed.rows(0, 3).into_owned();
        let p = self.traj.fixed.rows(3, 3).into_owned();
        let mut fixed = DVector::zeros(6);
        fixed.rows_mut(0, 3).copy_from(&(&v + (g + r * acc) * dt));
        fixed.rows_mut(3, 3).copy_from(&(p + v * dt));
        let inc = DVector::from_column_slice(((imu.gyro + self.gyro_bias) * dt).as_slice());
        TfgElement {
            rot: self.traj.rot.compose(&crate::lie::exp_rot(&inc)),
            fixed,
            body: DVector::zeros(0),
        }
    }
}

impl NavFilter for ImperfectIekf {
    fn name(&self) -> &'static str {
        "imperfect"
    }

    fn propagate(&mut self, imu: &ImuSample) -> Result<()> {
        let post = self.step(imu);
        let a = self.transition(&self.traj, &post, imu);
        let t = &self.tuning;
        let q_traj = filter::process_noise_hat(&self.noise, &post, ErrorSide::Right);
        let q_bias = DMatrix::from_diagonal(&DVector::from_fn(6, |i, _| {
            let w = if i < 3 {
                t.gyro_bias_walk
            } else {
                t.accel_bias_walk
            };
            w * w * t.dt
        }));
        let q = block_diag(&[&q_traj, &q_bias]);
        self.p = symmetrize(&(&a * &self.p * a.transpose() + q));
        self.traj = post;
        Ok(())
    }

    fn update(&mut self, obs: &[LandmarkObs]) -> Result<()> {
        if obs.is_empty() {
            return Ok(());
        }
        let models: Vec<OutputModel<f64>> =
            obs.iter().map(|o| landmark_output(&o.landmark)).collect();
        let refs: Vec<&OutputModel<f64>> = models.iter().collect();
        let om = stack_outputs(&refs)?;
        let measured = DVector::from_iterator(
            3 * obs.len(),
            obs.iter().flat_map(|o| o.measured.iter().copied()),
        );
        let z = filter::innovation(&om, &self.traj, &measured, ErrorSide::Right)?;
        let h9 = filter::jacobian_output(&om, TRAJECTORY_SHAPE, ErrorSide::Right)?;
        let mut h = DMatrix::zeros(om.dim(), 15);
        h.view_mut((0, 0), (om.dim(), 9)).copy_from(&h9);
        let (_, n_hat) = filter::noise_hat(&self.noise, &self.traj, ErrorSide::Right, om.dim())?;
        let k = filter::kalman_gain(&self.p, &h, &n_hat)?;
        let delta = &k * z;
        let xi = TfgTangent::from_vector(TRAJECTORY_SHAPE, &delta.rows(0, 9).into_owned())?;
        self.traj = exp_tfg(&xi).compose(&self.traj)?.orthonormalized();
        self.gyro_bias += Vector3::new(delta[9], delta[10], delta[11]);
        self.accel_bias += Vector3::new(delta[12], delta[13], delta[14]);
        self.p = symmetrize(&((DMatrix::identity(15, 15) - &k * h) * &self.p));
        Ok(())
    }

    fn estimate(&self) -> NavState {
        let mut full = self.traj.clone();
        full.body = DVector::zeros(6);
        let mut s = NavState::from_element(&full);
        s.gyro_bias = self.gyro_bias;
        s.accel_bias = self.accel_bias;
        s
    }
}
