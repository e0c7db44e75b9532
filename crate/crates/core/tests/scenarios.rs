//! Application systems, simulation, baselines and the Monte-Carlo driver.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use twoframes::baselines::ImperfectIekf;
use twoframes::filter::{self, FilterState, NoiseModel};
use twoframes::scenarios::inertial::{
    self, build_inertial_nav, draw_prior, exp3, simulate, ImuSample, InertialNavConfig, NavErrors,
    NavFilter, NavPrior, NavState, NavTuning, TfgNavFilter, Trajectory,
};
use twoframes::scenarios::lever_arm::{self, LeverArmConfig};
use twoframes::scenarios::monte_carlo::{
    run_filter, run_monte_carlo, run_rng, FilterKind, MonteCarloConfig,
};
use twoframes::scenarios::slammot::{self, SlammotConfig};
use twoframes::system_model::{check_commutation, check_natural_frame, NaturalFrameClass};
use twoframes::{
    ErrorSide, FrameDynamics, OutputModel, StepDynamics, TfgElement, TfgShape, TwoFramesSystem,
    VectorDynamics,
};

fn short(cfg: InertialNavConfig) -> InertialNavConfig {
    InertialNavConfig {
        duration_s: 5.0,
        ..cfg
    }
}

fn quiet() -> InertialNavConfig {
    InertialNavConfig {
        sigma_gyro_rad_s: 0.0,
        sigma_accel_m_s2: 0.0,
        init_sigma_att_deg: 0.0,
        init_sigma_vel_m_s: 0.0,
        init_sigma_pos_m: 0.0,
        init_sigma_gyro_bias_deg_s: 0.0,
        init_sigma_accel_bias_m_s2: 0.0,
        filter_gyro_bias_walk_rad_s_per_sqrt_s: 0.0,
        filter_accel_bias_walk_m_s2_per_sqrt_s: 0.0,
        ..Default::default()
    }
}

fn all_matrices(system: &TwoFramesSystem<f64>, n: usize) -> Vec<DMatrix<f64>> {
    let step = system.step(n);
    let mut m = vec![
        step.vector.f,
        step.vector.c,
        step.vector.phi,
        step.vector.gamma,
    ];
    for o in &system.outputs {
        m.push(o.h_fixed.clone());
        m.push(o.h_body.clone());
    }
    m
}

fn classify(system: &TwoFramesSystem<f64>) -> NaturalFrameClass {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    check_natural_frame(&system.step(3).frame, system.shape, 5, &mut rng).class
}

fn assert_commutes(system: &TwoFramesSystem<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for m in all_matrices(system, 3) {
        if m.is_empty() {
            continue;
        }
        let r = check_commutation(&m, system.shape.d, 10, &mut rng).unwrap();
        assert!(r.commutes && r.block_structure, "{r:?}");
    }
}

#[test]
fn builders_pass_their_validators() {
    let cfg = InertialNavConfig::default();
    let traj = Trajectory::generate(&short(cfg.clone()));
    let imu: Vec<ImuSample> = (0..traj.rates.len())
        .map(|n| ImuSample {
            gyro: traj.rates[n],
            accel: traj.specific_forces[n],
        })
        .collect();
    let nav = build_inertial_nav(&cfg, Arc::new(imu.clone()));
    assert_eq!(nav.shape, TfgShape::new(3, 2, 2));
    assert_commutes(&nav);
    assert_eq!(classify(&nav), NaturalFrameClass::NotNatural);
    let frozen = build_inertial_nav(
        &InertialNavConfig {
            gyro_bias_in_frame: false,
            ..cfg
        },
        Arc::new(vec![ImuSample {
            gyro: Vector3::zeros(),
            accel: Vector3::new(0.0, 0.0, 9.81),
        }]),
    );
    assert_eq!(classify(&frozen), NaturalFrameClass::CaseC);

    let la_cfg = LeverArmConfig::default();
    let la = lever_arm::build_lever_arm_car(Arc::new(lever_arm::odometry_profile(&la_cfg)));
    assert_commutes(&la);
    assert_eq!(classify(&la), NaturalFrameClass::Abelian);

    for singer in [false, true] {
        let s_cfg = SlammotConfig {
            singer,
            ..Default::default()
        };
        let s = slammot::build_slammot(&s_cfg, Arc::new(slammot::input_profile(&s_cfg)));
        let extra = if singer { 3 } else { 2 };
        assert_eq!(s.shape, TfgShape::new(3, 2 + 3 + extra * 2, 0));
        assert_commutes(&s);
        assert_eq!(classify(&s), NaturalFrameClass::CaseB);
    }
}

#[test]
fn static_slam_uses_the_extended_pose_law() {
    let cfg = SlammotConfig {
        moving_features: 0,
        static_landmarks: 2,
        ..Default::default()
    };
    let shape = cfg.layout().shape();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let a: TfgElement<f64> = twoframes::sampling::random_element(&mut rng, shape, 1.0, 1.0);
    let b: TfgElement<f64> = twoframes::sampling::random_element(&mut rng, shape, 1.0, 1.0);
    let ab = a.compose(&b).unwrap();
    assert_eq!(ab.rot, a.rot.compose(&b.rot));
    assert!((ab.fixed - (&a.fixed + twoframes::lie::act(&a.rot, &b.fixed))).amax() < 1e-14);
}

#[test]
fn inertial_step_without_forces_coasts() {
    let step = inertial::inertial_step(
        0.5,
        &Vector3::zeros(),
        &ImuSample {
            gyro: Vector3::zeros(),
            accel: Vector3::zeros(),
        },
        true,
    );
    let s = NavState {
        rot: exp3(&Vector3::new(0.1, 0.2, 0.3)),
        vel: Vector3::new(1.0, 2.0, 3.0),
        pos: Vector3::new(-1.0, 0.0, 4.0),
        gyro_bias: Vector3::zeros(),
        accel_bias: Vector3::zeros(),
    };
    let mut chi = s.to_element();
    for k in 1..=4 {
        chi = step.apply(&chi);
        let n = NavState::from_element(&chi);
        assert!((n.vel - s.vel).norm() < 1e-14);
        assert!((n.pos - (s.pos + s.vel * 0.5 * k as f64)).norm() < 1e-13);
    }
}

#[test]
fn inertial_step_matches_direct_formula() {
    let g = Vector3::new(0.0, 0.0, -9.81);
    let imu = ImuSample {
        gyro: Vector3::new(0.1, -0.3, 0.2),
        accel: Vector3::new(0.4, 0.1, 9.7),
    };
    let s = NavState {
        rot: exp3(&Vector3::new(0.3, -0.2, 1.0)),
        vel: Vector3::new(10.0, -2.0, 0.5),
        pos: Vector3::new(100.0, 50.0, 20.0),
        gyro_bias: Vector3::new(0.01, 0.02, -0.01),
        accel_bias: Vector3::new(0.1, -0.05, 0.2),
    };
    let dt = 0.01;
    let out =
        NavState::from_element(&inertial::inertial_step(dt, &g, &imu, true).apply(&s.to_element()));
    let rot = s.rot * exp3(&((imu.gyro + s.gyro_bias) * dt));
    let vel = s.vel + dt * (g + s.rot * (imu.accel + s.accel_bias));
    let pos = s.pos + dt * s.vel;
    assert!((out.rot - rot).amax() < 1e-14);
    assert!((out.vel - vel).amax() < 1e-13);
    assert!((out.pos - pos).amax() < 1e-13);
    assert_eq!(out.gyro_bias, s.gyro_bias);
}

#[test]
fn simulation_is_deterministic_and_consistent() {
    let cfg = short(InertialNavConfig {
        sigma_gyro_rad_s: 0.0,
        sigma_accel_m_s2: 0.0,
        ..Default::default()
    });
    let traj = Trajectory::generate(&cfg);
    let a = simulate(&cfg, &traj, &mut ChaCha8Rng::seed_from_u64(9));
    let b = simulate(&cfg, &traj, &mut ChaCha8Rng::seed_from_u64(9));
    assert_eq!(a.truth, b.truth);
    assert_eq!(a.imu, b.imu);
    assert_eq!(a.obs, b.obs);
    // Noise-free IMU replayed through the dynamics reproduces the truth.
    let g = cfg.gravity();
    for n in 1..a.truth.len() {
        let chi = inertial::inertial_step(cfg.dt_s, &g, &a.imu[n], true)
            .apply(&a.truth[n - 1].to_element());
        let e = NavErrors::between(&NavState::from_element(&chi), &a.truth[n]);
        assert!(
            e.att_deg < 1e-9 && e.vel < 1e-9 && e.pos < 1e-9,
            "step {n}: {e:?}"
        );
    }
    // Flight stays near the nominal circle.
    for s in &a.truth {
        assert!((s.pos.xy().norm() - cfg.radius_m).abs() < 1.0);
    }
}

#[test]
fn landmark_schedule() {
    let cfg = InertialNavConfig::default();
    let traj = Trajectory::generate(&cfg);
    let log = simulate(&cfg, &traj, &mut ChaCha8Rng::seed_from_u64(4));
    let every = cfg.obs_every();
    for (n, obs) in log.obs.iter().enumerate() {
        let t = n as f64 * cfg.dt_s;
        if n == 0 || n % every != 0 {
            assert!(obs.is_empty());
            continue;
        }
        let ids: Vec<usize> = obs.iter().map(|o| o.id).collect();
        if t < 20.0 - 1e-9 {
            assert_eq!(ids, vec![0], "t = {t}");
        } else {
            assert_eq!(ids, vec![0, 1, 2], "t = {t}");
        }
    }
}

#[test]
fn filters_stay_exact_without_noise_or_initial_error() {
    let cfg = short(InertialNavConfig {
        duration_s: 30.0,
        ..quiet()
    });
    let traj = Trajectory::generate(&cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let log = simulate(&cfg, &traj, &mut rng);
    let prior = draw_prior(&cfg, &log.truth[0], &mut rng);
    for kind in FilterKind::ALL {
        let errs = run_filter(kind, &cfg, &log, &prior).unwrap();
        for e in errs {
            for v in e.as_array() {
                assert!(v < 1e-6, "{kind}: {e:?}");
            }
        }
    }
}

/// Two-frames filter on `SO(3)^+_{2,0}` with a natural frame step.
fn pose_only_filter(prior: &NavPrior, t: &NavTuning) -> (FilterState<f64>, NoiseModel<f64>) {
    let mut est = prior.est.to_element();
    est.body = DVector::zeros(0);
    let mut p_bar = DMatrix::zeros(9, 9);
    for k in 0..3 {
        for i in 0..3 {
            p_bar[(3 * k + i, 3 * k + i)] = prior.sigma[k].powi(2);
        }
    }
    let p = filter::initial_covariance(&p_bar, &est, ErrorSide::Right);
    let mut noise = inertial::tfg_noise(t);
    noise.q_body = DMatrix::zeros(0, 0);
    (FilterState::new(est, p, ErrorSide::Right).unwrap(), noise)
}

fn pose_only_step(t: &NavTuning, imu: &ImuSample) -> StepDynamics<f64> {
    let full = inertial::inertial_step(t.dt, &t.gravity, imu, false);
    let v = full.vector;
    StepDynamics {
        vector: VectorDynamics {
            f: v.f,
            c: DMatrix::zeros(6, 0),
            fixed_drift: v.fixed_drift,
            body_input: v.body_input,
            phi: DMatrix::zeros(0, 0),
            gamma: DMatrix::zeros(0, 6),
            body_drift: DVector::zeros(0),
            fixed_input: DVector::zeros(0),
        },
        frame: full.frame,
    }
}

fn pose_output(l: &Vector3<f64>) -> OutputModel<f64> {
    let mut o = inertial::landmark_output(l);
    o.h_body = DMatrix::zeros(3, 0);
    o
}

#[test]
fn imperfect_iekf_with_known_biases_is_the_pose_filter() {
    let cfg = short(InertialNavConfig {
        init_sigma_gyro_bias_deg_s: 0.0,
        init_sigma_accel_bias_m_s2: 0.0,
        filter_gyro_bias_walk_rad_s_per_sqrt_s: 0.0,
        filter_accel_bias_walk_m_s2_per_sqrt_s: 0.0,
        ..Default::default()
    });
    let traj = Trajectory::generate(&cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let log = simulate(&cfg, &traj, &mut rng);
    let prior = draw_prior(&cfg, &log.truth[0], &mut rng);
    let t = NavTuning::from_config(&cfg);
    let mut imperfect = ImperfectIekf::new(&prior, &t);
    let (mut state, noise) = pose_only_filter(&prior, &t);
    for n in 1..log.truth.len() {
        imperfect.propagate(&log.imu[n]).unwrap();
        state = filter::propagate(&state, &pose_only_step(&t, &log.imu[n]), &noise).unwrap();
        if !log.obs[n].is_empty() {
            imperfect.update(&log.obs[n]).unwrap();
            let models: Vec<OutputModel<f64>> = log.obs[n]
                .iter()
                .map(|o| pose_output(&o.landmark))
                .collect();
            let refs: Vec<&OutputModel<f64>> = models.iter().collect();
            let om = twoframes::system_model::stack_outputs(&refs).unwrap();
            let y = DVector::from_iterator(
                om.dim(),
                log.obs[n].iter().flat_map(|o| o.measured.iter().copied()),
            );
            state = filter::update(&state, &om, &noise, &y).unwrap();
        }
        assert!(
            imperfect.traj.distance(&state.est) < 1e-10 * (1.0 + state.est.fixed.norm()),
            "step {n}"
        );
    }
    assert_eq!(imperfect.gyro_bias, Vector3::zeros());
}

#[test]
fn imperfect_and_two_frames_filters_differ_with_bias_error() {
    let cfg = short(InertialNavConfig::default());
    let traj = Trajectory::generate(&cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let log = simulate(&cfg, &traj, &mut rng);
    let prior = draw_prior(&cfg, &log.truth[0], &mut rng);
    let t = NavTuning::from_config(&cfg);
    let mut a = ImperfectIekf::new(&prior, &t);
    let mut b = TfgNavFilter::new(&prior, &t);
    let every = cfg.obs_every();
    for n in 1..=every {
        a.propagate(&log.imu[n]).unwrap();
        b.propagate(&log.imu[n]).unwrap();
        a.update(&log.obs[n]).unwrap();
        b.update(&log.obs[n]).unwrap();
    }
    let e = NavErrors::between(&a.estimate(), &b.estimate());
    assert!(e.gyro_bias_deg_s > 1e-6 || e.att_deg > 1e-6, "{e:?}");
}

#[test]
fn generic_and_natural_frames_agree_without_gyro_bias() {
    let t = NavTuning::from_config(&InertialNavConfig::default());
    let imu = ImuSample {
        gyro: Vector3::new(0.2, -0.1, 0.3),
        accel: Vector3::new(0.5, 0.2, 9.9),
    };
    let mut est = twoframes::sampling::random_element::<f64, _>(
        &mut ChaCha8Rng::seed_from_u64(8),
        TfgShape::new(3, 2, 2),
        1.0,
        2.0,
    );
    est.body.rows_mut(0, 3).fill(0.0);
    let p = DMatrix::identity(15, 15);
    let state = FilterState::new(est, p, ErrorSide::Right).unwrap();
    let noise = inertial::tfg_noise(&t);
    let a = filter::propagate(
        &state,
        &inertial::inertial_step(t.dt, &t.gravity, &imu, true),
        &noise,
    )
    .unwrap();
    let b = filter::propagate(
        &state,
        &inertial::inertial_step(t.dt, &t.gravity, &imu, false),
        &noise,
    )
    .unwrap();
    assert!(a.est.distance(&b.est) < 1e-14);
    // The gyro-bias coupling enters the covariance only.
    let diff = &a.p - &b.p;
    assert!(diff.amax() > 1e-8);
    assert!(matches!(
        inertial::inertial_step(t.dt, &t.gravity, &imu, false).frame,
        FrameDynamics::Natural { .. }
    ));
}

#[test]
fn monte_carlo_is_exact_without_noise() {
    let cfg = short(quiet());
    let mc = MonteCarloConfig {
        runs: 1,
        seed: 3,
        filters: FilterKind::ALL.to_vec(),
    };
    let r = run_monte_carlo(&cfg, &mc).unwrap();
    assert_eq!(r.times.len(), r.traces[0].rmse.len());
    for t in &r.traces {
        for row in &t.rmse {
            assert!(row.iter().all(|v| *v < 1e-6), "{}: {row:?}", t.kind);
        }
    }
}

#[test]
fn monte_carlo_runs_are_reproducible_and_order_independent() {
    let cfg = short(InertialNavConfig::default());
    let mc = MonteCarloConfig {
        runs: 4,
        seed: 11,
        filters: vec![FilterKind::Mekf, FilterKind::Tfg],
    };
    let a = run_monte_carlo(&cfg, &mc).unwrap();
    let b = run_monte_carlo(&cfg, &mc).unwrap();
    assert_eq!(a, b);
    // Run 2 replayed alone gives the same trace.
    let traj = Trajectory::generate(&cfg);
    let mut rng = run_rng(11, 2);
    let log = simulate(&cfg, &traj, &mut rng);
    let prior = draw_prior(&cfg, &log.truth[0], &mut rng);
    let alone = run_filter(FilterKind::Tfg, &cfg, &log, &prior).unwrap();
    assert_eq!(a.trace(FilterKind::Tfg).unwrap().per_run[2], alone);
}

#[test]
fn invalid_configs_are_rejected() {
    let bad = InertialNavConfig {
        dt_s: 0.0,
        ..Default::default()
    };
    assert!(bad.validate().is_err());
    let bad = InertialNavConfig {
        landmark_start_s: vec![0.0],
        ..Default::default()
    };
    assert!(bad.validate().is_err());
    let mc = MonteCarloConfig {
        runs: 0,
        ..Default::default()
    };
    assert!(run_monte_carlo(&InertialNavConfig::default(), &mc).is_err());
}
