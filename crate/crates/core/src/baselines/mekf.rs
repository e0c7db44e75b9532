//! Multiplicative EKF on `SO(3) × R¹²`.
//!
//! Error `(δθ, δv, δp, δb^ω, δb^a)` with `R = R̂ exp(δθ)` and additive errors
//! elsewhere.

use nalgebra::{DMatrix, DVector, Matrix3, SMatrix, SVector, Vector3};

use crate::error::Result;
use crate::filter;
use crate::lie::right_jacobian;
use crate::scenarios::inertial::{
    exp3, ImuSample, LandmarkObs, NavFilter, NavPrior, NavState, NavTuning,
};

pub type Mat15 = SMatrix<f64, 15, 15>;

fn skew3(v: &Vector3<f64>) -> Matrix3<f64> {
    v.cross_matrix()
}

fn jr(v: &Vector3<f64>) -> Matrix3<f64> {
    let j = right_jacobian(&DVector::from_column_slice(v.as_slice()));
    Matrix3::from_iterator(j.iter().copied())
}

/// Estimate and covariance of the multiplicative EKF.
#[derive(Clone, Debug, PartialEq)]
pub struct Mekf {
    pub est: NavState,
    pub p: Mat15,
    pub tuning: NavTuning,
}

impl Mekf {
    pub fn new(prior: &NavPrior, tuning: &NavTuning) -> Self {
        let p = Mat15::from_iterator(prior.classical_covariance().iter().copied());
        Self {
            est: prior.est.clone(),
            p,
            tuning: tuning.clone(),
        }
    }

    /// Error transition of one propagation step.
    ///
    /// ```text
    /// δθ' = Exp(Δt μ̂)ᵀ δθ + J̄(Δt μ̂) Δt δb^ω
    /// δv' = δv − Δt R̂ (â)× δθ + Δt R̂ δb^a
    /// δp' = δp + Δt δv
    /// ```
    pub fn transition(&self, imu: &ImuSample) -> Mat15 {
        let dt = self.tuning.dt;
        let mu = (imu.gyro + self.est.gyro_bias) * dt;
        let acc = imu.accel + self.est.accel_bias;
        let r = self.est.rot;
        let mut a = Mat15::identity();
        a.fixed_view_mut::<3, 3>(0, 0)
            .copy_from(&exp3(&mu).transpose());
        a.fixed_view_mut::<3, 3>(0, 9).copy_from(&(jr(&mu) * dt));
        a.fixed_view_mut::<3, 3>(3, 0)
            .copy_from(&(-r * skew3(&acc) * dt));
        a.fixed_view_mut::<3, 3>(3, 12).copy_from(&(r * dt));
        a.fixed_view_mut::<3, 3>(6, 3)
            .copy_from(&(Matrix3::identity() * dt));
        a
    }

    fn process_noise(&self, imu: &ImuSample) -> Mat15 {
        let t = &self.tuning;
        let dt = t.dt;
        let g = jr(&((imu.gyro + self.est.gyro_bias) * dt)) * dt;
        let mut q = Mat15::zeros();
        q.fixed_view_mut::<3, 3>(0, 0)
            .copy_from(&(g * g.transpose() * t.sigma_gyro.powi(2)));
        q.fixed_view_mut::<3, 3>(3, 3)
            .copy_from(&(Matrix3::identity() * (dt * t.sigma_accel).powi(2)));
        q.fixed_view_mut::<3, 3>(9, 9)
            .copy_from(&(Matrix3::identity() * t.gyro_bias_walk.powi(2) * dt));
        q.fixed_view_mut::<3, 3>(12, 12)
            .copy_from(&(Matrix3::identity() * t.accel_bias_walk.powi(2) * dt));
        q
    }

    /// Observation Jacobian `[(ŷ)×, 0, −R̂ᵀ, 0, 0]` of one landmark.
    pub fn observation_jacobian(&self, landmark: &Vector3<f64>) -> SMatrix<f64, 3, 15> {
        let y = self.predict(landmark);
        let mut h = SMatrix::<f64, 3, 15>::zeros();
        h.fixed_view_mut::<3, 3>(0, 0).copy_from(&skew3(&y));
        h.fixed_view_mut::<3, 3>(0, 6)
            .copy_from(&(-self.est.rot.transpose()));
        h
    }

    pub fn predict(&self, landmark: &Vector3<f64>) -> Vector3<f64> {
        self.est.rot.transpose() * (landmark - self.est.pos)
    }

    /// Applies an error-state correction.
    pub fn inject(&mut self, dx: &SVector<f64, 15>) {
        let v = |i: usize| Vector3::new(dx[i], dx[i + 1], dx[i + 2]);
        let rot = self.est.rot * exp3(&v(0));
        self.est.rot = nalgebra::Rotation3::from_matrix(&rot).into_inner();
        self.est.vel += v(3);
        self.est.pos += v(6);
        self.est.gyro_bias += v(9);
        self.est.accel_bias += v(12);
    }
}

impl NavFilter for Mekf {
    fn name(&self) -> &'static str {
        "mekf"
    }

    fn propagate(&mut self, imu: &ImuSample) -> Result<()> {
        let a = self.transition(imu);
        let q = self.process_noise(imu);
        let dt = self.tuning.dt;
        let s = &mut self.est;
        let acc = imu.accel + s.accel_bias;
        let vel = s.vel + (self.tuning.gravity + s.rot * acc) * dt;
        s.pos += s.vel * dt;
        s.vel = vel;
        s.rot *= exp3(&((imu.gyro + s.gyro_bias) * dt));
        let p = a * self.p * a.transpose() + q;
        self.p = (p + p.transpose()) * 0.5;
        Ok(())
    }

    fn update(&mut self, obs: &[LandmarkObs]) -> Result<()> {
        if obs.is_empty() {
            return Ok(());
        }
        let m = 3 * obs.len();
        let mut h = DMatrix::zeros(m, 15);
        let mut z = DVector::zeros(m);
        for (k, o) in obs.iter().enumerate() {
            h.view_mut((3 * k, 0), (3, 15))
                .copy_from(&self.observation_jacobian(&o.landmark));
            z.rows_mut(3 * k, 3)
                .copy_from(&(o.measured - self.predict(&o.landmark)));
        }
        let p = DMatrix::from_iterator(15, 15, self.p.iter().copied());
        let n = DMatrix::identity(m, m) * self.tuning.sigma_landmark.powi(2);
        let k = filter::kalman_gain(&p, &h, &n)?;
        let dx = SVector::<f64, 15>::from_iterator((&k * z).iter().copied());
        self.inject(&dx);
        let ikh = DMatrix::identity(15, 15) - &k * h;
        let p = ikh * p;
        let p = Mat15::from_iterator(p.iter().copied());
        self.p = (p + p.transpose()) * 0.5;
        Ok(())
    }

    fn estimate(&self) -> NavState {
        self.est.clone()
    }
}
