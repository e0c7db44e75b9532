//! Flat-earth inertial navigation with IMU biases and known landmarks.
//!
//! State `(R, x, X)` with `x = (v, p)` in the fixed frame and
//! `X = (b^ω, b^a)` in the body frame. Discrete dynamics:
//!
//! ```text
//! R ← R exp(Δt (ω + b^ω))
//! v ← v + Δt (g + R (a + b^a))
//! p ← p + Δt v
//! ```
//!
//! Landmark `m` is observed in the body frame: `Y = Rᵀ (r^m − p)`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TfgError};
use crate::filter::{self, FilterState, NoiseModel};
use crate::lie::{exp_rot, log_rot, right_jacobian, skew, Rotation};
use crate::sampling::gaussian_vector;
use crate::system_model::{
    stack_outputs, ErrorSide, Frame, FrameDynamics, FrameMap, OutputModel, StepDynamics,
    TwoFramesSystem, VectorDynamics,
};
use crate::tfg::{TfgElement, TfgShape};

pub const SHAPE: TfgShape = TfgShape { d: 3, n1: 2, n2: 2 };

/// Scenario parameters. Units are part of every field name.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InertialNavConfig {
    pub dt_s: f64,
    pub duration_s: f64,
    pub obs_period_s: f64,
    pub record_period_s: f64,
    pub radius_m: f64,
    pub speed_m_s: f64,
    pub altitude_m: f64,
    pub roll_amplitude_rad: f64,
    pub roll_rate_rad_s: f64,
    pub pitch_amplitude_rad: f64,
    pub pitch_rate_rad_s: f64,
    pub gravity_m_s2: [f64; 3],
    pub landmarks_m: Vec<[f64; 3]>,
    pub landmark_start_s: Vec<f64>,
    pub sigma_gyro_rad_s: f64,
    pub sigma_accel_m_s2: f64,
    pub sigma_landmark_m: f64,
    pub init_sigma_att_deg: f64,
    pub init_sigma_vel_m_s: f64,
    pub init_sigma_pos_m: f64,
    pub init_sigma_gyro_bias_deg_s: f64,
    pub init_sigma_accel_bias_m_s2: f64,
    pub filter_gyro_bias_walk_rad_s_per_sqrt_s: f64,
    pub filter_accel_bias_walk_m_s2_per_sqrt_s: f64,
    pub gyro_bias_in_frame: bool,
}

impl Default for InertialNavConfig {
    fn default() -> Self {
        Self {
            dt_s: 0.01,
            duration_s: 80.0,
            obs_period_s: 0.1,
            record_period_s: 0.1,
            radius_m: 200.0,
            speed_m_s: 20.0,
            altitude_m: 100.0,
            roll_amplitude_rad: 0.1,
            roll_rate_rad_s: 0.3,
            pitch_amplitude_rad: 0.05,
            pitch_rate_rad_s: 0.5,
            gravity_m_s2: [0.0, 0.0, -9.81],
            landmarks_m: vec![[200.0, 0.0, 0.0], [0.0, 200.0, 50.0], [0.0, -200.0, 50.0]],
            landmark_start_s: vec![0.0, 20.0, 20.0],
            sigma_gyro_rad_s: 0.01,
            sigma_accel_m_s2: 0.05,
            sigma_landmark_m: 1.0,
            init_sigma_att_deg: 30.0,
            init_sigma_vel_m_s: 0.1,
            init_sigma_pos_m: 1.0,
            init_sigma_gyro_bias_deg_s: 1.0,
            init_sigma_accel_bias_m_s2: 0.981,
            filter_gyro_bias_walk_rad_s_per_sqrt_s: 1e-5,
            filter_accel_bias_walk_m_s2_per_sqrt_s: 1e-4,
            gyro_bias_in_frame: true,
        }
    }
}

impl InertialNavConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(TfgError::Config(m.to_string()));
        if !(self.dt_s > 0.0) {
            return bad("dt_s must be positive");
        }
        if !(self.duration_s >= self.dt_s) {
            return bad("duration_s must be at least dt_s");
        }
        if !(self.obs_period_s >= self.dt_s) || !(self.record_period_s >= self.dt_s) {
            return bad("obs_period_s and record_period_s must be at least dt_s");
        }
        if self.landmarks_m.len() != self.landmark_start_s.len() {
            return bad("landmarks_m and landmark_start_s must have the same length");
        }
        let sigmas = [
            self.sigma_gyro_rad_s,
            self.sigma_accel_m_s2,
            self.sigma_landmark_m,
            self.init_sigma_att_deg,
            self.init_sigma_vel_m_s,
            self.init_sigma_pos_m,
            self.init_sigma_gyro_bias_deg_s,
            self.init_sigma_accel_bias_m_s2,
            self.filter_gyro_bias_walk_rad_s_per_sqrt_s,
            self.filter_accel_bias_walk_m_s2_per_sqrt_s,
        ];
        if sigmas.iter().any(|s| !(*s >= 0.0)) {
            return bad("standard deviations must be non-negative");
        }
        if !(self.sigma_landmark_m > 0.0) {
            return bad("sigma_landmark_m must be positive");
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.duration_s / self.dt_s).round() as usize
    }

    fn period_steps(&self, period: f64) -> usize {
        ((period / self.dt_s).round() as usize).max(1)
    }

    pub fn obs_every(&self) -> usize {
        self.period_steps(self.obs_period_s)
    }

    pub fn record_every(&self) -> usize {
        self.period_steps(self.record_period_s)
    }

    pub fn gravity(&self) -> Vector3<f64> {
        Vector3::from(self.gravity_m_s2)
    }
}

/// Physical navigation state.
#[derive(Clone, Debug, PartialEq)]
pub struct NavState {
    pub rot: Matrix3<f64>,
    pub vel: Vector3<f64>,
    pub pos: Vector3<f64>,
    pub gyro_bias: Vector3<f64>,
    pub accel_bias: Vector3<f64>,
}

impl NavState {
    pub fn to_element(&self) -> TfgElement<f64> {
        let mut fixed = DVector::zeros(6);
        fixed.rows_mut(0, 3).copy_from(&self.vel);
        fixed.rows_mut(3, 3).copy_from(&self.pos);
        let mut body = DVector::zeros(6);
        body.rows_mut(0, 3).copy_from(&self.gyro_bias);
        body.rows_mut(3, 3).copy_from(&self.accel_bias);
        TfgElement {
            rot: Rotation::from_matrix_unchecked(DMatrix::from_iterator(
                3,
                3,
                self.rot.iter().copied(),
            )),
            fixed,
            body,
        }
    }

    pub fn from_element(e: &TfgElement<f64>) -> Self {
        let m = e.rot.matrix();
        let v3 = |v: &DVector<f64>, i: usize| Vector3::new(v[i], v[i + 1], v[i + 2]);
        Self {
            rot: Matrix3::from_iterator(m.iter().copied()),
            vel: v3(&e.fixed, 0),
            pos: v3(&e.fixed, 3),
            gyro_bias: v3(&e.body, 0),
            accel_bias: v3(&e.body, 3),
        }
    }
}

/// Gyroscope and accelerometer readings of one step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ImuSample {
    pub gyro: Vector3<f64>,
    pub accel: Vector3<f64>,
}

/// Body-frame observation of a known landmark.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LandmarkObs {
    pub id: usize,
    pub landmark: Vector3<f64>,
    pub measured: Vector3<f64>,
}

/// Error norms of one estimate against the truth.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NavErrors {
    pub att_deg: f64,
    pub vel: f64,
    pub pos: f64,
    pub gyro_bias_deg_s: f64,
    pub accel_bias: f64,
}

impl NavErrors {
    pub fn between(est: &NavState, truth: &NavState) -> Self {
        let r = est.rot.transpose() * truth.rot;
        let c = ((r.trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
        let s = 0.5
            * Vector3::new(
                r[(2, 1)] - r[(1, 2)],
                r[(0, 2)] - r[(2, 0)],
                r[(1, 0)] - r[(0, 1)],
            )
            .norm();
        Self {
            att_deg: s.atan2(c).to_degrees(),
            vel: (est.vel - truth.vel).norm(),
            pos: (est.pos - truth.pos).norm(),
            gyro_bias_deg_s: (est.gyro_bias - truth.gyro_bias).norm().to_degrees(),
            accel_bias: (est.accel_bias - truth.accel_bias).norm(),
        }
    }

    pub fn as_array(&self) -> [f64; 5] {
        [
            self.att_deg,
            self.vel,
            self.pos,
            self.gyro_bias_deg_s,
            self.accel_bias,
        ]
    }
}

/// Common step interface of every navigation filter.
pub trait NavFilter: Send {
    fn name(&self) -> &'static str;
    fn propagate(&mut self, imu: &ImuSample) -> Result<()>;
    fn update(&mut self, obs: &[LandmarkObs]) -> Result<()>;
    fn estimate(&self) -> NavState;
}

/// Initial estimate and the standard deviations of its classical error
/// `(attitude, velocity, position, gyro bias, accel bias)`.
#[derive(Clone, Debug, PartialEq)]
pub struct NavPrior {
    pub est: NavState,
    pub sigma: [f64; 5],
}

impl NavPrior {
    pub fn classical_covariance(&self) -> DMatrix<f64> {
        let mut p = DMatrix::zeros(15, 15);
        for (k, s) in self.sigma.iter().enumerate() {
            for i in 0..3 {
                p[(3 * k + i, 3 * k + i)] = s * s;
            }
        }
        p
    }
}

/// Shared filter tuning.
#[derive(Clone, Debug, PartialEq)]
pub struct NavTuning {
    pub dt: f64,
    pub gravity: Vector3<f64>,
    pub sigma_gyro: f64,
    pub sigma_accel: f64,
    pub sigma_landmark: f64,
    pub gyro_bias_walk: f64,
    pub accel_bias_walk: f64,
    pub gyro_bias_in_frame: bool,
}

impl NavTuning {
    pub fn from_config(cfg: &InertialNavConfig) -> Self {
        Self {
            dt: cfg.dt_s,
            gravity: cfg.gravity(),
            sigma_gyro: cfg.sigma_gyro_rad_s,
            sigma_accel: cfg.sigma_accel_m_s2,
            sigma_landmark: cfg.sigma_landmark_m,
            gyro_bias_walk: cfg.filter_gyro_bias_walk_rad_s_per_sqrt_s,
            accel_bias_walk: cfg.filter_accel_bias_walk_m_s2_per_sqrt_s,
            gyro_bias_in_frame: cfg.gyro_bias_in_frame,
        }
    }
}

fn dvec3(v: &Vector3<f64>) -> DVector<f64> {
    DVector::from_column_slice(v.as_slice())
}

/// Frame dynamics `R ← R exp(Δt (ω + b^ω))` with the gyro bias read from the
/// state, and their right-error Jacobian.
#[derive(Clone, Debug, PartialEq)]
pub struct ImuFrame {
    pub gyro: Vector3<f64>,
    pub dt: f64,
}

impl ImuFrame {
    fn increment(&self, chi: &TfgElement<f64>) -> DVector<f64> {
        DVector::from_fn(3, |i, _| self.dt * (self.gyro[i] + chi.body[i]))
    }
}

impl FrameMap<f64> for ImuFrame {
    fn apply(&self, chi: &TfgElement<f64>) -> Rotation<f64> {
        chi.rot.compose(&exp_rot(&self.increment(chi)))
    }

    /// ```text
    /// [ I  0  0  M1        0  ]
    /// [ 0  I  0  (v̂)× M1   0  ]
    /// [ 0  0  I  (p̂)× M1   0  ]
    /// [ 0  0  0  M2        0  ]
    /// [ 0  0  0  0         M2 ]
    /// ```
    /// with `M1 = Δt R̂⁺ J̄(Δt μ) R̂ᵀ`, `M2 = R̂⁺ R̂ᵀ`, `μ = ω + b̂^ω`.
    fn error_jacobian(
        &self,
        pre: &TfgElement<f64>,
        post: &TfgElement<f64>,
        side: ErrorSide,
    ) -> Result<DMatrix<f64>> {
        if side != ErrorSide::Right {
            return Err(TfgError::Unsupported(
                "IMU frame Jacobian is derived for the right-invariant error".into(),
            ));
        }
        let jr = right_jacobian(&self.increment(pre));
        let m2 = post.rot.matrix() * pre.rot.matrix().transpose();
        let m1 = post.rot.matrix() * jr * pre.rot.matrix().transpose() * self.dt;
        let mut a = DMatrix::identity(15, 15);
        let v = pre.fixed.rows(0, 3);
        let p = pre.fixed.rows(3, 3);
        a.view_mut((0, 9), (3, 3)).copy_from(&m1);
        a.view_mut((3, 9), (3, 3))
            .copy_from(&(skew(&[v[0], v[1], v[2]]) * &m1));
        a.view_mut((6, 9), (3, 3))
            .copy_from(&(skew(&[p[0], p[1], p[2]]) * &m1));
        a.view_mut((9, 9), (3, 3)).copy_from(&m2);
        a.view_mut((12, 12), (3, 3)).copy_from(&m2);
        Ok(a)
    }

    fn describe(&self) -> String {
        "gyro bias in frame dynamics".into()
    }
}

/// Two-frames dynamics of one IMU step.
///
/// With `gyro_bias_in_frame = false` the bias is left out of the frame step,
/// which becomes the natural `R ← R exp(Δt ω)`.
pub fn inertial_step(
    dt: f64,
    gravity: &Vector3<f64>,
    imu: &ImuSample,
    gyro_bias_in_frame: bool,
) -> StepDynamics<f64> {
    let i3 = DMatrix::<f64>::identity(3, 3);
    let mut f = DMatrix::identity(6, 6);
    f.view_mut((3, 0), (3, 3)).copy_from(&(&i3 * dt));
    let mut c = DMatrix::zeros(6, 6);
    c.view_mut((0, 3), (3, 3)).copy_from(&(&i3 * dt));
    let mut fixed_drift = DVector::zeros(6);
    fixed_drift.rows_mut(0, 3).copy_from(&(gravity * dt));
    let mut body_input = DVector::zeros(6);
    body_input.rows_mut(0, 3).copy_from(&(imu.accel * dt));
    let vector = VectorDynamics {
        f,
        c,
        fixed_drift,
        body_input,
        phi: DMatrix::identity(6, 6),
        gamma: DMatrix::zeros(6, 6),
        body_drift: DVector::zeros(6),
        fixed_input: DVector::zeros(6),
    };
    let frame = if gyro_bias_in_frame {
        FrameDynamics::Generic(Arc::new(ImuFrame { gyro: imu.gyro, dt }))
    } else {
        FrameDynamics::Natural {
            o: Rotation::identity(3),
            omega: exp_rot(&dvec3(&(imu.gyro * dt))),
        }
    };
    StepDynamics { vector, frame }
}

/// Body-frame landmark output: `H^x = [0 I]`, `H^X = 0`, `b = r`.
pub fn landmark_output(landmark: &Vector3<f64>) -> OutputModel<f64> {
    let mut h_fixed = DMatrix::zeros(3, 6);
    h_fixed.view_mut((0, 3), (3, 3)).fill_with_identity();
    OutputModel {
        frame: Frame::Body,
        h_fixed,
        h_body: DMatrix::zeros(3, 6),
        offset: dvec3(landmark),
    }
}

/// Two-frames system driven by a recorded IMU stream (`imu[n]` drives step
/// `n`, the first step being 1).
pub fn build_inertial_nav(
    cfg: &InertialNavConfig,
    imu: Arc<Vec<ImuSample>>,
) -> TwoFramesSystem<f64> {
    let (dt, g, in_frame) = (cfg.dt_s, cfg.gravity(), cfg.gyro_bias_in_frame);
    let outputs = cfg
        .landmarks_m
        .iter()
        .map(|l| landmark_output(&Vector3::from(*l)))
        .collect();
    TwoFramesSystem {
        shape: SHAPE,
        dynamics: Arc::new(move |n| {
            let sample = imu
                .get(n)
                .or_else(|| imu.last())
                .copied()
                .unwrap_or(ImuSample {
                    gyro: Vector3::zeros(),
                    accel: Vector3::zeros(),
                });
            inertial_step(dt, &g, &sample, in_frame)
        }),
        outputs,
    }
}

/// Noise model of the two-frames formulation.
pub fn tfg_noise(t: &NavTuning) -> NoiseModel<f64> {
    let dt = t.dt;
    let mut q_body = DMatrix::zeros(6, 6);
    for i in 0..3 {
        q_body[(i, i)] = t.gyro_bias_walk.powi(2) * dt;
        q_body[(i + 3, i + 3)] = t.accel_bias_walk.powi(2) * dt;
    }
    NoiseModel {
        q_rot: DMatrix::identity(3, 3) * (t.sigma_gyro * dt).powi(2),
        q_fixed: DMatrix::identity(3, 3) * t.sigma_accel.powi(2),
        q_body,
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

/// TFG-IEKF on `SO(3)^+_{2,2}` with body-frame landmark observations.
pub struct TfgNavFilter {
    pub state: FilterState<f64>,
    pub noise: NoiseModel<f64>,
    pub tuning: NavTuning,
}

impl TfgNavFilter {
    pub fn new(prior: &NavPrior, tuning: &NavTuning) -> Self {
        let est = prior.est.to_element();
        let p = filter::initial_covariance(&prior.classical_covariance(), &est, ErrorSide::Right);
        Self {
            state: FilterState {
                est,
                p,
                side: ErrorSide::Right,
            },
            noise: tfg_noise(tuning),
            tuning: tuning.clone(),
        }
    }
}

impl NavFilter for TfgNavFilter {
    fn name(&self) -> &'static str {
        "tfg"
    }

    fn propagate(&mut self, imu: &ImuSample) -> Result<()> {
        let step = inertial_step(
            self.tuning.dt,
            &self.tuning.gravity,
            imu,
            self.tuning.gyro_bias_in_frame,
        );
        self.state = filter::propagate(&self.state, &step, &self.noise)?;
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
        self.state = filter::update(&self.state, &om, &self.noise, &measured)?;
        Ok(())
    }

    fn estimate(&self) -> NavState {
        NavState::from_element(&self.state.est)
    }
}

/// Deterministic reference trajectory: a horizontal circle flown at
/// constant speed with small roll and pitch oscillations.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub states: Vec<NavState>,
    /// True body rate and specific force driving step `n` (index 0 unused).
    pub rates: Vec<Vector3<f64>>,
    pub specific_forces: Vec<Vector3<f64>>,
}

fn attitude_at(cfg: &InertialNavConfig, t: f64) -> Matrix3<f64> {
    let yaw_rate = cfg.speed_m_s / cfg.radius_m;
    let yaw = std::f64::consts::FRAC_PI_2 + yaw_rate * t;
    let pitch = cfg.pitch_amplitude_rad * (cfg.pitch_rate_rad_s * t).sin();
    let roll = cfg.roll_amplitude_rad * (cfg.roll_rate_rad_s * t).sin();
    nalgebra::Rotation3::from_euler_angles(roll, pitch, yaw).into_inner()
}

fn velocity_at(cfg: &InertialNavConfig, t: f64) -> Vector3<f64> {
    let w = cfg.speed_m_s / cfg.radius_m;
    Vector3::new(-(w * t).sin(), (w * t).cos(), 0.0) * cfg.speed_m_s
}

impl Trajectory {
    /// Integrates the discrete dynamics so that the truth satisfies them
    /// exactly; rates and specific forces are solved for step by step.
    pub fn generate(cfg: &InertialNavConfig) -> Self {
        let n = cfg.steps();
        let dt = cfg.dt_s;
        let g = cfg.gravity();
        let mut states = Vec::with_capacity(n + 1);
        states.push(NavState {
            rot: attitude_at(cfg, 0.0),
            vel: velocity_at(cfg, 0.0),
            pos: Vector3::new(cfg.radius_m, 0.0, cfg.altitude_m),
            gyro_bias: Vector3::zeros(),
            accel_bias: Vector3::zeros(),
        });
        let mut rates = vec![Vector3::zeros()];
        let mut forces = vec![Vector3::zeros()];
        for k in 1..=n {
            let t = k as f64 * dt;
            let prev = &states[k - 1];
            let target = attitude_at(cfg, t);
            let rel = Rotation::from_matrix_unchecked(DMatrix::from_iterator(
                3,
                3,
                (prev.rot.transpose() * target).iter().copied(),
            ));
            let inc = log_rot(&rel).expect("attitude increment is small");
            let rate = Vector3::new(inc[0], inc[1], inc[2]) / dt;
            let vel = velocity_at(cfg, t);
            let force = prev.rot.transpose() * ((vel - prev.vel) / dt - g);
            let rot = prev.rot * exp3(&(rate * dt));
            states.push(NavState {
                rot,
                vel: prev.vel + (g + prev.rot * force) * dt,
                pos: prev.pos + prev.vel * dt,
                gyro_bias: Vector3::zeros(),
                accel_bias: Vector3::zeros(),
            });
            rates.push(rate);
            forces.push(force);
        }
        Self {
            states,
            rates,
            specific_forces: forces,
        }
    }
}

/// `exp` of a rotation vector as a fixed-size matrix.
pub fn exp3(v: &Vector3<f64>) -> Matrix3<f64> {
    let r = exp_rot(&dvec3(v));
    Matrix3::from_iterator(r.matrix().iter().copied())
}

/// Simulated run: truth with biases, IMU stream and landmark observations.
#[derive(Clone, Debug)]
pub struct SimLog {
    pub dt: f64,
    pub truth: Vec<NavState>,
    /// `imu[n]` drives step `n`; `imu[0]` is unused.
    pub imu: Vec<ImuSample>,
    /// Observations available after step `n`.
    pub obs: Vec<Vec<LandmarkObs>>,
}

impl SimLog {
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.truth.len()).map(move |n| n as f64 * self.dt)
    }
}

/// Draws biases and sensor noise for one run.
///
/// The truth is the reference trajectory with constant biases; the IMU reads
/// `ω_m = ω − b^ω + n_ω`, `a_m = f − b^a + n_a`, so the truth obeys the
/// dynamics driven by the measured signals up to the sensor noise.
pub fn simulate<R: Rng + ?Sized>(
    cfg: &InertialNavConfig,
    traj: &Trajectory,
    rng: &mut R,
) -> SimLog {
    let gyro_bias: DVector<f64> =
        gaussian_vector(rng, 3, cfg.init_sigma_gyro_bias_deg_s.to_radians());
    let accel_bias: DVector<f64> = gaussian_vector(rng, 3, cfg.init_sigma_accel_bias_m_s2);
    let bw = Vector3::new(gyro_bias[0], gyro_bias[1], gyro_bias[2]);
    let ba = Vector3::new(accel_bias[0], accel_bias[1], accel_bias[2]);
    let n = traj.states.len() - 1;
    let obs_every = cfg.obs_every();
    let landmarks: Vec<Vector3<f64>> = cfg.landmarks_m.iter().map(|l| Vector3::from(*l)).collect();
    let mut truth = Vec::with_capacity(n + 1);
    let mut imu = Vec::with_capacity(n + 1);
    let mut obs = Vec::with_capacity(n + 1);
    imu.push(ImuSample {
        gyro: Vector3::zeros(),
        accel: Vector3::zeros(),
    });
    obs.push(Vec::new());
    for (k, s) in traj.states.iter().enumerate() {
        let mut state = s.clone();
        state.gyro_bias = bw;
        state.accel_bias = ba;
        truth.push(state);
        if k == 0 {
            continue;
        }
        let nw: DVector<f64> = gaussian_vector(rng, 3, cfg.sigma_gyro_rad_s);
        let na: DVector<f64> = gaussian_vector(rng, 3, cfg.sigma_accel_m_s2);
        imu.push(ImuSample {
            gyro: traj.rates[k] - bw + Vector3::new(nw[0], nw[1], nw[2]),
            accel: traj.specific_forces[k] - ba + Vector3::new(na[0], na[1], na[2]),
        });
    }
    for k in 1..=n {
        let t = k as f64 * cfg.dt_s;
        let mut now = Vec::new();
        if k % obs_every == 0 {
            for (id, (l, start)) in landmarks.iter().zip(&cfg.landmark_start_s).enumerate() {
                if t + 1e-9 >= *start {
                    let noise: DVector<f64> = gaussian_vector(rng, 3, cfg.sigma_landmark_m);
                    let s = &truth[k];
                    now.push(LandmarkObs {
                        id,
                        landmark: *l,
                        measured: s.rot.transpose() * (l - s.pos)
                            + Vector3::new(noise[0], noise[1], noise[2]),
                    });
                }
            }
        }
        obs.push(now);
    }
    SimLog {
        dt: cfg.dt_s,
        truth,
        imu,
        obs,
    }
}

/// Initial estimate drawn around the truth with the configured spreads.
pub fn draw_prior<R: Rng + ?Sized>(
    cfg: &InertialNavConfig,
    truth: &NavState,
    rng: &mut R,
) -> NavPrior {
    let sigma = [
        cfg.init_sigma_att_deg.to_radians(),
        cfg.init_sigma_vel_m_s,
        cfg.init_sigma_pos_m,
        cfg.init_sigma_gyro_bias_deg_s.to_radians(),
        cfg.init_sigma_accel_bias_m_s2,
    ];
    let att: DVector<f64> = gaussian_vector(rng, 3, sigma[0]);
    let dv: DVector<f64> = gaussian_vector(rng, 3, sigma[1]);
    let dp: DVector<f64> = gaussian_vector(rng, 3, sigma[2]);
    let v3 = |d: &DVector<f64>| Vector3::new(d[0], d[1], d[2]);
    NavPrior {
        est: NavState {
            rot: truth.rot * exp3(&-v3(&att)),
            vel: truth.vel - v3(&dv),
            pos: truth.pos - v3(&dp),
            gyro_bias: Vector3::zeros(),
            accel_bias: Vector3::zeros(),
        },
        sigma,
    }
}
