//! Numerical checks shared by `selftest` and the acceptance target. Each
//! returns the worst residual it observed.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Vector2, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use twoframes::filter::{self, jacobian_frame, jacobian_output, jacobian_vector, NoiseModel};
use twoframes::lie::{exp_rot, log_rot};
use twoframes::sampling::{
    gaussian_vector, random_element, random_natural_step, random_output, random_tangent,
};
use twoframes::scenarios::inertial::{inertial_step, ImuFrame, ImuSample};
use twoframes::scenarios::lever_arm::{self, HandError, OdometrySample};
use twoframes::system_model::{check_group_affine, stack_outputs, FrameMap};
use twoframes::tfg::{
    embed_algebra, embed_matrix, left_error, log_tfg, right_error, unembed_matrix,
};
use twoframes::{
    ErrorSide, Frame, FrameDynamics, OutputModel, StepDynamics, TfgElement, TfgShape, TfgTangent,
    TwoFramesSystem, VectorDynamics,
};
use twoframes_oracles::{
    central_jacobian, empirical_covariance, expm, moment_matched_samples, relative_error,
};

/// Exponential under test; the library one unless a suite is mutated.
pub type ExpFn = fn(&TfgTangent<f64>) -> TfgElement<f64>;

pub fn library_exp(xi: &TfgTangent<f64>) -> TfgElement<f64> {
    twoframes::tfg::exp_tfg(xi)
}

pub fn random_shape(rng: &mut ChaCha8Rng) -> TfgShape {
    TfgShape::new(
        if rng.random_bool(0.5) { 3 } else { 2 },
        rng.random_range(0..3),
        rng.random_range(0..3),
    )
}

fn embed_dist(a: &TfgElement<f64>, b: &TfgElement<f64>) -> f64 {
    (embed_matrix(a) - embed_matrix(b)).amax()
}

/// Compose, inverse and exponential against the matrix embedding.
pub fn embedding_residual(shape: TfgShape, count: usize, exp: ExpFn, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0f64;
    for _ in 0..count {
        let a: TfgElement<f64> = random_element(&mut rng, shape, 1.0, 2.0);
        let b: TfgElement<f64> = random_element(&mut rng, shape, 1.0, 2.0);
        let ab = unembed_matrix(&(embed_matrix(&a) * embed_matrix(&b)), shape).expect("shape");
        worst = worst.max(embed_dist(&a.compose(&b).expect("shape"), &ab));
        let inv = embed_matrix(&a)
            .try_inverse()
            .expect("embedding is invertible");
        worst = worst.max(embed_dist(
            &a.inverse(),
            &unembed_matrix(&inv, shape).expect("shape"),
        ));
        let norm = rng.random_range(0.0..2.5);
        let xi: TfgTangent<f64> = random_tangent(&mut rng, shape, norm);
        let e = unembed_matrix(&expm(&embed_algebra(&xi), 30), shape).expect("shape");
        worst = worst.max(embed_dist(&exp(&xi), &e));
    }
    worst
}

/// Group-affine residual over random natural systems.
pub fn natural_group_affine_residual(count: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let shape = random_shape(&mut rng);
            let step = random_natural_step::<f64, _>(&mut rng, shape);
            check_group_affine(|c| step.apply(c), shape, 5, 1.0, &mut rng)
        })
        .fold(0.0, f64::max)
}

/// Group-affine residual of flat-earth dynamics with the gyro bias in the
/// frame step, for unit-scale elements.
pub fn gyro_bias_counterexample_residual(seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let imu = ImuSample {
        gyro: Vector3::new(0.1, -0.2, 0.3),
        accel: Vector3::new(0.5, 0.0, 9.81),
    };
    let step = inertial_step(0.1, &Vector3::new(0.0, 0.0, -9.81), &imu, true);
    check_group_affine(|c| step.apply(c), TfgShape::new(3, 2, 2), 20, 1.0, &mut rng)
}

fn side_of(i: usize) -> ErrorSide {
    if i % 2 == 0 {
        ErrorSide::Left
    } else {
        ErrorSide::Right
    }
}

fn propagation_matrix(step: &StepDynamics<f64>, shape: TfgShape, side: ErrorSide) -> DMatrix<f64> {
    let id = TfgElement::identity(shape);
    jacobian_frame(&step.frame, shape, &id, &id, side).expect("natural frame")
        * jacobian_vector(&step.vector, shape, side)
}

/// Nonlinear error propagation against `exp(A^s A^v ξ)` for `‖ξ‖ ≤ max_norm`.
pub fn log_linearity_residual(count: usize, max_norm: f64, exp: ExpFn, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0f64;
    for i in 0..count {
        let shape = random_shape(&mut rng);
        let side = side_of(i);
        let step = random_natural_step::<f64, _>(&mut rng, shape);
        let a = propagation_matrix(&step, shape, side);
        let norm = rng.random_range(0.0..max_norm);
        let xi: TfgTangent<f64> = random_tangent(&mut rng, shape, norm);
        let next = filter::error_propagate(&exp(&xi), &step, side).expect("natural step");
        let linear = &a * xi.to_vector();
        let lin = exp(&TfgTangent::from_vector(shape, &linear).expect("shape"));
        worst = worst.max(next.distance(&lin) / (1.0 + linear.norm()));
    }
    worst
}

/// Abstract and component forms of the error recursions.
pub fn recursion_agreement_residual(count: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0f64;
    for i in 0..count {
        let shape = random_shape(&mut rng);
        let side = side_of(i);
        let step = random_natural_step::<f64, _>(&mut rng, shape);
        let err: TfgElement<f64> = random_element(&mut rng, shape, 1.0, 1.0);
        let a = filter::error_propagate(&err, &step, side).expect("natural step");
        let b = filter::error_propagate_components(&err, &step, side).expect("natural step");
        worst = worst.max(a.distance(&b));
        let l: TfgElement<f64> = random_element(&mut rng, shape, 1.0, 1.0);
        let u = filter::error_update(&err, &l, side);
        worst = worst.max(u.distance(&filter::error_update_components(&err, &l, side)));
    }
    worst
}

fn stacked(system: &TwoFramesSystem<f64>) -> OutputModel<f64> {
    let refs: Vec<&OutputModel<f64>> = system.outputs.iter().collect();
    stack_outputs(&refs).expect("outputs share a frame")
}

/// Riccati gains at the identity, state independent for natural systems.
fn gain_schedule(
    system: &TwoFramesSystem<f64>,
    steps: usize,
    side: ErrorSide,
) -> Vec<DMatrix<f64>> {
    let shape = system.shape;
    let om = stacked(system);
    let h = jacobian_output(&om, shape, side).expect("side");
    let n = shape.dim();
    let mut p = DMatrix::identity(n, n);
    let q = DMatrix::identity(n, n) * 1e-3;
    let noise = DMatrix::identity(om.dim(), om.dim());
    (0..steps)
        .map(|i| {
            let a = propagation_matrix(&system.step(i + 1), shape, side);
            p = &a * &p * a.transpose() + &q;
            let k = filter::kalman_gain(&p, &h, &noise).expect("well conditioned");
            p = (DMatrix::identity(n, n) - &k * &h) * &p;
            p = (&p + p.transpose()) * 0.5;
            k
        })
        .collect()
}

fn error_sequence(
    system: &TwoFramesSystem<f64>,
    truth0: &TfgElement<f64>,
    err0: &TfgElement<f64>,
    gains: &[DMatrix<f64>],
    side: ErrorSide,
) -> Vec<TfgElement<f64>> {
    let om = stacked(system);
    let shape = system.shape;
    let mut truth = truth0.clone();
    let mut est = match side {
        ErrorSide::Left => truth.compose(&err0.inverse()).expect("shape"),
        ErrorSide::Right => err0.inverse().compose(&truth).expect("shape"),
    };
    gains
        .iter()
        .enumerate()
        .map(|(n, k)| {
            let step = system.step(n + 1);
            truth = step.apply(&truth);
            est = step.apply(&est);
            let z = filter::innovation(&om, &est, &om.evaluate(&truth), side).expect("side");
            let l =
                twoframes::tfg::exp_tfg(&TfgTangent::from_vector(shape, &(k * z)).expect("shape"));
            est = match side {
                ErrorSide::Left => est.compose(&l).expect("shape"),
                ErrorSide::Right => l.compose(&est).expect("shape"),
            };
            match side {
                ErrorSide::Left => left_error(&est, &truth).expect("shape"),
                ErrorSide::Right => right_error(&est, &truth).expect("shape"),
            }
        })
        .collect()
}

/// Largest difference between the invariant-error sequences of two distinct
/// trajectories sharing the initial error and the gain schedule. With
/// `level`, both start at `R = I`.
pub fn trajectory_independence_residual(
    system: &TwoFramesSystem<f64>,
    side: ErrorSide,
    steps: usize,
    seed: u64,
    level: bool,
) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shape = system.shape;
    let gains = gain_schedule(system, steps, side);
    let err0: TfgElement<f64> = random_element(&mut rng, shape, 0.5, 1.0);
    let mut t1: TfgElement<f64> = random_element(&mut rng, shape, 1.0, 2.0);
    let mut t2: TfgElement<f64> = random_element(&mut rng, shape, 1.0, 2.0);
    if level {
        t1.rot = twoframes::Rotation::identity(shape.d);
        t2.rot = twoframes::Rotation::identity(shape.d);
    }
    let e1 = error_sequence(system, &t1, &err0, &gains, side);
    let e2 = error_sequence(system, &t2, &err0, &gains, side);
    e1.iter()
        .zip(&e2)
        .map(|(a, b)| a.distance(b))
        .fold(0.0, f64::max)
}

/// Relative finite-difference residuals of the Jacobians.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct JacobianResiduals {
    pub vector: f64,
    pub frame: f64,
    pub imu_frame: f64,
    pub output: f64,
}

impl JacobianResiduals {
    pub fn worst(&self) -> f64 {
        self.vector
            .max(self.frame)
            .max(self.imu_frame)
            .max(self.output)
    }
}

fn fd_error_map(step: &StepDynamics<f64>, est: &TfgElement<f64>, side: ErrorSide) -> DMatrix<f64> {
    let shape = est.shape();
    central_jacobian(
        |v| {
            let err = twoframes::tfg::exp_tfg(&TfgTangent::from_vector(shape, v).expect("shape"));
            log_tfg(&filter::error_propagate_at(&err, est, step, side))
                .expect("small error")
                .to_vector()
        },
        &DVector::zeros(shape.dim()),
        1e-6,
    )
}

pub fn jacobian_residuals(count: usize, seed: u64) -> JacobianResiduals {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r = JacobianResiduals::default();
    for i in 0..count {
        let shape = random_shape(&mut rng);
        let side = side_of(i);
        let step = random_natural_step::<f64, _>(&mut rng, shape);
        let est: TfgElement<f64> = random_element(&mut rng, shape, 1.0, 1.0);
        let only_vector = StepDynamics {
            vector: step.vector.clone(),
            frame: FrameDynamics::identity(shape.d),
        };
        let a_v = jacobian_vector(&step.vector, shape, side);
        r.vector = r.vector.max(relative_error(
            &fd_error_map(&only_vector, &est, side),
            &a_v,
            1.0,
        ));
        let only_frame = StepDynamics {
            vector: VectorDynamics::identity(shape),
            frame: step.frame.clone(),
        };
        let a_s = jacobian_frame(&step.frame, shape, &est, &est, side).expect("natural");
        r.frame = r.frame.max(relative_error(
            &fd_error_map(&only_frame, &est, side),
            &a_s,
            1.0,
        ));

        let frame = if i % 2 == 0 {
            Frame::Fixed
        } else {
            Frame::Body
        };
        let om = random_output::<f64, _>(&mut rng, shape, frame, 2);
        let h = jacobian_output(&om, shape, frame.error_side()).expect("side");
        let fd = central_jacobian(
            |v| {
                let e = twoframes::tfg::exp_tfg(&TfgTangent::from_vector(shape, v).expect("shape"));
                filter::innovation_from_error(&om, &e)
            },
            &DVector::zeros(shape.dim()),
            1e-6,
        );
        r.output = r.output.max(relative_error(&fd, &h, 1.0));

        let imu_shape = TfgShape::new(3, 2, 2);
        let est: TfgElement<f64> = random_element(&mut rng, imu_shape, 1.0, 3.0);
        let map = ImuFrame {
            gyro: Vector3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            ),
            dt: rng.random_range(0.005..0.2),
        };
        let post = TfgElement {
            rot: map.apply(&est),
            ..est.clone()
        };
        let a_s = map
            .error_jacobian(&est, &post, ErrorSide::Right)
            .expect("right side");
        let step = StepDynamics {
            vector: VectorDynamics::identity(imu_shape),
            frame: FrameDynamics::Generic(Arc::new(map)),
        };
        r.imu_frame = r.imu_frame.max(relative_error(
            &fd_error_map(&step, &est, ErrorSide::Right),
            &a_s,
            1.0,
        ));
    }
    r
}

fn apply_noise(
    noise: &NoiseModel<f64>,
    est: &TfgElement<f64>,
    w: &DVector<f64>,
) -> TfgElement<f64> {
    let shape = est.shape();
    let a = shape.rot_dim();
    let (kq, kr) = (noise.q_fixed.nrows(), noise.q_body.nrows());
    let gx = noise
        .g_fixed
        .as_ref()
        .map_or_else(|| DMatrix::identity(shape.fixed_len(), kq), |g| g(est));
    let gb = noise
        .g_body
        .as_ref()
        .map_or_else(|| DMatrix::identity(shape.body_len(), kr), |g| g(est));
    TfgElement {
        rot: est.rot.compose(&exp_rot(&w.rows(0, a).into_owned())),
        fixed: &est.fixed + gx * w.rows(a, kq),
        body: &est.body + gb * w.rows(a + kq, kr),
    }
}

/// `max |Σ̂ − Q̂| / max |Q̂|` where `Σ̂` is the empirical covariance of the
/// log-errors produced by `samples` moment-matched noise draws.
pub fn noise_sampling_residual(samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0f64;
    for shape in [TfgShape::new(3, 2, 2), TfgShape::new(2, 1, 1)] {
        for side in [ErrorSide::Left, ErrorSide::Right] {
            let est: TfgElement<f64> = random_element(&mut rng, shape, 1.0, 3.0);
            let (a, q, r, d) = (
                shape.rot_dim(),
                shape.fixed_len(),
                shape.body_len(),
                shape.d,
            );
            let s = 1e-4;
            let mut noise = NoiseModel::<f64>::zero(shape);
            noise.q_rot = DMatrix::identity(a, a) * (s * s);
            noise.q_fixed = DMatrix::identity(d, d) * (4.0 * s * s);
            noise.q_body = DMatrix::identity(r, r) * (9.0 * s * s);
            noise.g_fixed = Some(Arc::new(move |chi: &TfgElement<f64>| {
                let mut g = DMatrix::zeros(q, d);
                g.view_mut((0, 0), (d, d)).copy_from(chi.rot.matrix());
                g
            }));
            let cov = filter::process_noise_hat(&noise, &est, side);
            let mut diag = DVector::zeros(a + d + r);
            diag.rows_mut(0, a).fill(s * s);
            diag.rows_mut(a, d).fill(4.0 * s * s);
            diag.rows_mut(a + d, r).fill(9.0 * s * s);
            let draws = moment_matched_samples(&mut rng, &DMatrix::from_diagonal(&diag), samples);
            let errors: Vec<DVector<f64>> = draws
                .iter()
                .map(|w| {
                    let truth = apply_noise(&noise, &est, w);
                    let err = match side {
                        ErrorSide::Left => left_error(&est, &truth).expect("shape"),
                        ErrorSide::Right => right_error(&est, &truth).expect("shape"),
                    };
                    log_tfg(&err).expect("small error").to_vector()
                })
                .collect();
            worst = worst.max((empirical_covariance(&errors) - &cov).amax() / cov.amax());
        }
    }
    worst
}

fn to_hand(e: &TfgElement<f64>) -> HandError {
    HandError {
        theta: log_rot(&e.rot).expect("planar")[0],
        x: Vector2::new(e.fixed[0], e.fixed[1]),
        lever: Vector2::new(e.body[0], e.body[1]),
    }
}

fn hand_gap(lib: &TfgElement<f64>, hand: &HandError) -> f64 {
    let l = to_hand(lib);
    let rel = |a: &Vector2<f64>, b: &Vector2<f64>| (a - b).norm() / (1.0 + b.norm());
    (l.theta - hand.theta)
        .sin()
        .abs()
        .max(rel(&l.x, &hand.x))
        .max(rel(&l.lever, &hand.lever))
}

/// Library lever-arm error recursion against the hand-written one over a
/// chain of random propagation and update steps.
///
/// With `resync`, every step starts both recursions from the library state,
/// so only the one-step maps are compared. Without it the two chains run
/// open loop and the gap also carries accumulated roundoff, since the
/// corrections are supplied from outside and never contract it.
pub fn lever_arm_recursion_residual(steps: usize, seed: u64, resync: bool) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut err: TfgElement<f64> = random_element(&mut rng, lever_arm::SHAPE, 0.5, 1.0);
    let mut hand = to_hand(&err);
    let om = lever_arm::gnss_output();
    let mut worst = 0f64;
    for _ in 0..steps {
        if resync {
            hand = to_hand(&err);
        }
        let s: DVector<f64> = gaussian_vector(&mut rng, 2, 1.0);
        let odo = OdometrySample {
            shift: Vector2::new(s[0], s[1]),
            turn: rng.random_range(-0.5..0.5),
        };
        err = filter::error_propagate(&err, &lever_arm::lever_arm_step(&odo), ErrorSide::Left)
            .expect("natural");
        hand = hand.propagate(&odo);
        worst = worst.max(hand_gap(&err, &hand));
        if resync {
            hand = to_hand(&err);
        }
        let z = filter::innovation_from_error(&om, &err);
        let zh = hand.innovation();
        worst = worst.max((Vector2::new(z[0], z[1]) - zh).norm() / (1.0 + zh.norm()));
        let l_theta = 0.5 * hand.theta + rng.random_range(-0.05..0.05);
        let (l_x, l_lever) = (hand.x * 0.5, hand.lever * 0.5);
        let l = TfgElement {
            rot: exp_rot(&DVector::from_element(1, l_theta)),
            fixed: DVector::from_column_slice(l_x.as_slice()),
            body: DVector::from_column_slice(l_lever.as_slice()),
        };
        err = filter::error_update(&err, &l, ErrorSide::Left);
        hand = hand.update(l_theta, &l_x, &l_lever);
        worst = worst.max(hand_gap(&err, &hand));
    }
    worst
}
