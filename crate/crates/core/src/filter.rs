//! Invariant extended Kalman filter on the two-frames group.
//!
//! Fixed-frame outputs pair with the left-invariant error `E = χ̂⁻¹ ∘ χ` and
//! body-frame outputs with the right-invariant error `e = χ ∘ χ̂⁻¹`. The
//! covariance `P` describes the exponential coordinates `ξ` of that error.
//!
//! Besides the filter itself the module exposes the exact nonlinear error
//! recursions, in both an abstract form (group products) and a component
//! form, which serve as test oracles for the Jacobians.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, TfgError};
use crate::lie::{act, adjoint, dg_operator, rep_matrix};
use crate::scalar::{lit, to_f64, Real};
use crate::system_model::{
    ErrorSide, Frame, FrameDynamics, OutputModel, StepDynamics, TwoFramesSystem, VectorDynamics,
};
use crate::tfg::{exp_tfg, TfgElement, TfgShape, TfgTangent};

/// Largest accepted condition number of the innovation covariance.
pub const MAX_INNOVATION_CONDITION: f64 = 1e12;

/// Estimate, covariance of the invariant error, and which error it is.
#[derive(Clone, Debug, PartialEq)]
pub struct FilterState<T: Real> {
    pub est: TfgElement<T>,
    pub p: DMatrix<T>,
    pub side: ErrorSide,
}

/// State-dependent noise gain `G(χ)`.
pub type NoiseGain<T> = Arc<dyn Fn(&TfgElement<T>) -> DMatrix<T> + Send + Sync>;

/// Process noise enters as
///
/// ```text
/// R ← s(χ) exp(w^R),  x ← … + G^x(χ) w^x,  X ← … + G^X(χ) w^X
/// ```
///
/// and observation noise is added to the output.
#[derive(Clone)]
pub struct NoiseModel<T: Real> {
    pub q_rot: DMatrix<T>,
    pub q_fixed: DMatrix<T>,
    pub q_body: DMatrix<T>,
    /// `None` means identity.
    pub g_fixed: Option<NoiseGain<T>>,
    /// `None` means identity.
    pub g_body: Option<NoiseGain<T>>,
    /// Either the full observation covariance or a `d × d` block repeated
    /// for every output vector.
    pub obs: DMatrix<T>,
}

impl<T: Real> std::fmt::Debug for NoiseModel<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NoiseModel")
            .field("q_rot", &self.q_rot)
            .field("q_fixed", &self.q_fixed)
            .field("q_body", &self.q_body)
            .field("obs", &self.obs)
            .finish()
    }
}

impl<T: Real> NoiseModel<T> {
    /// No process noise, identity observation noise.
    pub fn zero(shape: TfgShape) -> Self {
        let (a, q, r) = (shape.rot_dim(), shape.fixed_len(), shape.body_len());
        Self {
            q_rot: DMatrix::zeros(a, a),
            q_fixed: DMatrix::zeros(q, q),
            q_body: DMatrix::zeros(r, r),
            g_fixed: None,
            g_body: None,
            obs: DMatrix::identity(shape.d, shape.d),
        }
    }

    /// Observation covariance for an output of dimension `dim`.
    pub fn obs_cov(&self, dim: usize) -> Result<DMatrix<T>> {
        let k = self.obs.nrows();
        if k == dim {
            return Ok(self.obs.clone());
        }
        if k == 0 || dim % k != 0 {
            return Err(TfgError::ShapeMismatch(format!(
                "observation covariance {k}x{k} does not fit output dimension {dim}"
            )));
        }
        Ok(DMatrix::identity(dim / k, dim / k).kronecker(&self.obs))
    }

    fn gain_fixed(&self, est: &TfgElement<T>) -> DMatrix<T> {
        match &self.g_fixed {
            Some(g) => g(est),
            None => DMatrix::identity(est.fixed.len(), self.q_fixed.nrows()),
        }
    }

    fn gain_body(&self, est: &TfgElement<T>) -> DMatrix<T> {
        match &self.g_body {
            Some(g) => g(est),
            None => DMatrix::identity(est.body.len(), self.q_body.nrows()),
        }
    }
}

/// Error-propagation and output Jacobians of one step.
#[derive(Clone, Debug, PartialEq)]
pub struct JacobianSet<T: Real> {
    pub a_s: DMatrix<T>,
    pub a_v: DMatrix<T>,
    pub h: DMatrix<T>,
}

pub(crate) fn symmetrize<T: Real>(p: &DMatrix<T>) -> DMatrix<T> {
    (p + p.transpose()) * lit::<T>(0.5)
}

pub(crate) fn block_diag<T: Real>(blocks: &[&DMatrix<T>]) -> DMatrix<T> {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let m: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = DMatrix::zeros(n, m);
    let (mut i, mut j) = (0, 0);
    for b in blocks {
        out.view_mut((i, j), b.shape()).copy_from(b);
        i += b.nrows();
        j += b.ncols();
    }
    out
}

fn check_side<T: Real>(om: &OutputModel<T>, side: ErrorSide) -> Result<()> {
    if om.frame.error_side() == side {
        Ok(())
    } else {
        Err(TfgError::FrameMismatch)
    }
}

/// Innovation computed from the estimate and a measurement.
///
/// ```text
/// fixed:  Z = R̂⁻¹ * (y − H^x x̂) − H^X X̂ − B
/// body:   z = R̂ * (Y + H^X X̂) + H^x x̂ − b
/// ```
pub fn innovation<T: Real>(
    om: &OutputModel<T>,
    est: &TfgElement<T>,
    measured: &DVector<T>,
    side: ErrorSide,
) -> Result<DVector<T>> {
    check_side(om, side)?;
    if measured.len() != om.dim() {
        return Err(TfgError::ShapeMismatch(format!(
            "measurement of length {} for output of dimension {}",
            measured.len(),
            om.dim()
        )));
    }
    Ok(match om.frame {
        Frame::Fixed => {
            act(&est.rot.inverse(), &(measured - &om.h_fixed * &est.fixed))
                - &om.h_body * &est.body
                - &om.offset
        }
        Frame::Body => {
            act(&est.rot, &(measured + &om.h_body * &est.body)) + &om.h_fixed * &est.fixed
                - &om.offset
        }
    })
}

/// Innovation written as a function of the invariant error alone.
///
/// ```text
/// fixed:  Z = H^x E^x + H^X E^R * E^X + E^R * B − B
/// body:   z = (e^R)⁻¹ * b − b − H^x (e^R)⁻¹ * e^x − H^X e^X
/// ```
pub fn innovation_from_error<T: Real>(om: &OutputModel<T>, err: &TfgElement<T>) -> DVector<T> {
    match om.frame {
        Frame::Fixed => {
            &om.h_fixed * &err.fixed
                + &om.h_body * act(&err.rot, &err.body)
                + act(&err.rot, &om.offset)
                - &om.offset
        }
        Frame::Body => {
            let r_inv = err.rot.inverse();
            act(&r_inv, &om.offset)
                - &om.offset
                - &om.h_fixed * act(&r_inv, &err.fixed)
                - &om.h_body * &err.body
        }
    }
}

fn assemble<T: Real>(
    shape: TfgShape,
    top: &DMatrix<T>,
    blocks: [[&DMatrix<T>; 3]; 2],
) -> DMatrix<T> {
    let (a, q, r) = (shape.rot_dim(), shape.fixed_len(), shape.body_len());
    let n = shape.dim();
    let mut m = DMatrix::zeros(n, n);
    m.view_mut((0, 0), (a, a)).copy_from(top);
    let offsets = [0, a, a + q];
    let widths = [a, q, r];
    for (row, (row_off, height)) in [(a, q), (a + q, r)].into_iter().enumerate() {
        for col in 0..3 {
            m.view_mut((row_off, offsets[col]), (height, widths[col]))
                .copy_from(blocks[row][col]);
        }
    }
    m
}

/// Jacobian `A^v` of the vector step.
///
/// ```text
/// left:  [[I, 0, 0], [−dg(ū), F, C], [−dg(d̄), Γ, Φ]]
/// right: [[I, 0, 0], [ dg(d), F, C], [ dg(u),  Γ, Φ]]
/// ```
pub fn jacobian_vector<T: Real>(
    vd: &VectorDynamics<T>,
    shape: TfgShape,
    side: ErrorSide,
) -> DMatrix<T> {
    let d = shape.d;
    let id = DMatrix::identity(shape.rot_dim(), shape.rot_dim());
    let (gx, gb) = match side {
        ErrorSide::Left => (
            -dg_operator(&vd.body_input, d),
            -dg_operator(&vd.body_drift, d),
        ),
        ErrorSide::Right => (
            dg_operator(&vd.fixed_drift, d),
            dg_operator(&vd.fixed_input, d),
        ),
    };
    assemble(shape, &id, [[&gx, &vd.f, &vd.c], [&gb, &vd.gamma, &vd.phi]])
}

/// Jacobian `A^s` of the frame step, given the estimate before and after it.
///
/// ```text
/// left:  blockdiag(Ad_{Ω⁻¹}, rep(Ω⁻¹ O⁻¹), I)
/// right: blockdiag(Ad_O, I, rep(O Ω))
/// ```
pub fn jacobian_frame<T: Real>(
    fd: &FrameDynamics<T>,
    shape: TfgShape,
    pre: &TfgElement<T>,
    post: &TfgElement<T>,
    side: ErrorSide,
) -> Result<DMatrix<T>> {
    match fd {
        FrameDynamics::Generic(map) => map.error_jacobian(pre, post, side),
        FrameDynamics::Natural { o, omega } => {
            let (q, r) = (shape.fixed_len(), shape.body_len());
            Ok(match side {
                ErrorSide::Left => {
                    let w_inv = omega.inverse();
                    block_diag(&[
                        &adjoint(&w_inv),
                        &rep_matrix(&w_inv.compose(&o.inverse()), shape.n1),
                        &DMatrix::identity(r, r),
                    ])
                }
                ErrorSide::Right => block_diag(&[
                    &adjoint(o),
                    &DMatrix::identity(q, q),
                    &rep_matrix(&o.compose(omega), shape.n2),
                ]),
            })
        }
    }
}

/// Output Jacobian `H`: left `[−dg(B), H^x, H^X]`, right `[dg(b), −H^x, −H^X]`.
pub fn jacobian_output<T: Real>(
    om: &OutputModel<T>,
    shape: TfgShape,
    side: ErrorSide,
) -> Result<DMatrix<T>> {
    check_side(om, side)?;
    let m = om.dim();
    let (a, q, r) = (shape.rot_dim(), shape.fixed_len(), shape.body_len());
    let mut h = DMatrix::zeros(m, a + q + r);
    let dg = dg_operator(&om.offset, shape.d);
    let sign = match side {
        ErrorSide::Left => -T::one(),
        ErrorSide::Right => T::one(),
    };
    h.view_mut((0, 0), (m, a)).copy_from(&(dg * sign));
    h.view_mut((0, a), (m, q)).copy_from(&(&om.h_fixed * -sign));
    h.view_mut((0, a + q), (m, r))
        .copy_from(&(&om.h_body * -sign));
    Ok(h)
}

/// Full Jacobian set for one propagation step followed by an output.
pub fn jacobians<T: Real>(
    step: &StepDynamics<T>,
    om: &OutputModel<T>,
    est: &TfgElement<T>,
    side: ErrorSide,
) -> Result<JacobianSet<T>> {
    let shape = est.shape();
    let mid = step.vector.apply(est);
    let post = step.frame.apply(&mid);
    Ok(JacobianSet {
        a_s: jacobian_frame(&step.frame, shape, &mid, &post, side)?,
        a_v: jacobian_vector(&step.vector, shape, side),
        h: jacobian_output(om, shape, side)?,
    })
}

/// Map `B` from process noise `(w^R, w^x, w^X)` to the error coordinates,
/// so that `Q̂ = B diag(Q^R, Q^x, Q^X) Bᵀ`.
///
/// ```text
/// left:  [[I, 0, 0], [0, rep(R̂)⁻¹ G^x, 0], [−dg(X̂), 0, G^X]]
/// right: [[Ad_R̂, 0, 0], [dg(x̂) Ad_R̂, G^x, 0], [0, 0, rep(R̂) G^X]]
/// ```
pub fn noise_map<T: Real>(
    noise: &NoiseModel<T>,
    est: &TfgElement<T>,
    side: ErrorSide,
) -> DMatrix<T> {
    let shape = est.shape();
    let (a, q, r) = (shape.rot_dim(), shape.fixed_len(), shape.body_len());
    let (kq, kr) = (noise.q_fixed.nrows(), noise.q_body.nrows());
    let gx = noise.gain_fixed(est);
    let gb = noise.gain_body(est);
    let mut b = DMatrix::zeros(a + q + r, a + kq + kr);
    match side {
        ErrorSide::Left => {
            b.view_mut((0, 0), (a, a)).fill_with_identity();
            b.view_mut((a, a), (q, kq))
                .copy_from(&(rep_matrix(&est.rot.inverse(), shape.n1) * gx));
            b.view_mut((a + q, 0), (r, a))
                .copy_from(&-dg_operator(&est.body, shape.d));
            b.view_mut((a + q, a + kq), (r, kr)).copy_from(&gb);
        }
        ErrorSide::Right => {
            let ad = adjoint(&est.rot);
            b.view_mut((a, 0), (q, a))
                .copy_from(&(dg_operator(&est.fixed, shape.d) * &ad));
            b.view_mut((0, 0), (a, a)).copy_from(&ad);
            b.view_mut((a, a), (q, kq)).copy_from(&gx);
            b.view_mut((a + q, a + kq), (r, kr))
                .copy_from(&(rep_matrix(&est.rot, shape.n2) * gb));
        }
    }
    b
}

/// Process and observation noise covariances `(Q̂, N̂)` in error coordinates.
///
/// `N̂ = rep(R̂)⁻¹ N rep(R̂)⁻ᵀ` for the left error and `rep(R̂) N rep(R̂)ᵀ`
/// for the right error.
pub fn noise_hat<T: Real>(
    noise: &NoiseModel<T>,
    est: &TfgElement<T>,
    side: ErrorSide,
    obs_dim: usize,
) -> Result<(DMatrix<T>, DMatrix<T>)> {
    let q_hat = process_noise_hat(noise, est, side);
    let n = noise.obs_cov(obs_dim)?;
    let d = est.rot.dim();
    let rot = match side {
        ErrorSide::Left => est.rot.inverse(),
        ErrorSide::Right => est.rot.clone(),
    };
    let rep = rep_matrix(&rot, obs_dim / d);
    Ok((q_hat, symmetrize(&(&rep * n * rep.transpose()))))
}

pub fn process_noise_hat<T: Real>(
    noise: &NoiseModel<T>,
    est: &TfgElement<T>,
    side: ErrorSide,
) -> DMatrix<T> {
    let b = noise_map(noise, est, side);
    let q = block_diag(&[&noise.q_rot, &noise.q_fixed, &noise.q_body]);
    symmetrize(&(&b * q * b.transpose()))
}

/// Transform `L` from the classical error `(R̂⁻¹R or RR̂⁻¹, x − x̂, X − X̂)`
/// to the invariant error coordinates.
///
/// ```text
/// left:  [[I, 0, 0], [0, rep(R̂⁻¹), 0], [−dg(X̂), 0, I]]
/// right: [[I, 0, 0], [dg(x̂), I, 0], [0, 0, rep(R̂)]]
/// ```
pub fn classical_to_invariant<T: Real>(est: &TfgElement<T>, side: ErrorSide) -> DMatrix<T> {
    let shape = est.shape();
    let (a, q, r) = (shape.rot_dim(), shape.fixed_len(), shape.body_len());
    let mut l = DMatrix::identity(a + q + r, a + q + r);
    match side {
        ErrorSide::Left => {
            l.view_mut((a, a), (q, q))
                .copy_from(&rep_matrix(&est.rot.inverse(), shape.n1));
            l.view_mut((a + q, 0), (r, a))
                .copy_from(&-dg_operator(&est.body, shape.d));
        }
        ErrorSide::Right => {
            l.view_mut((a, 0), (q, a))
                .copy_from(&dg_operator(&est.fixed, shape.d));
            l.view_mut((a + q, a + q), (r, r))
                .copy_from(&rep_matrix(&est.rot, shape.n2));
        }
    }
    l
}

/// `P₀ = L P̄ Lᵀ`.
pub fn initial_covariance<T: Real>(
    p_bar: &DMatrix<T>,
    est: &TfgElement<T>,
    side: ErrorSide,
) -> DMatrix<T> {
    let l = classical_to_invariant(est, side);
    symmetrize(&(&l * p_bar * l.transpose()))
}

impl<T: Real> FilterState<T> {
    pub fn new(est: TfgElement<T>, p: DMatrix<T>, side: ErrorSide) -> Result<Self> {
        let n = est.shape().dim();
        if p.shape() != (n, n) {
            return Err(TfgError::ShapeMismatch(format!(
                "covariance is {}x{}, state dimension is {n}",
                p.nrows(),
                p.ncols()
            )));
        }
        Ok(Self { est, p, side })
    }
}

/// Propagation: copy of the dynamics for the estimate, and
/// `P ← A^s A^v P (A^s A^v)ᵀ + Q̂`.
pub fn propagate<T: Real>(
    state: &FilterState<T>,
    step: &StepDynamics<T>,
    noise: &NoiseModel<T>,
) -> Result<FilterState<T>> {
    let shape = state.est.shape();
    let mid = step.vector.apply(&state.est);
    let post = step.frame.apply(&mid);
    let a_v = jacobian_vector(&step.vector, shape, state.side);
    let a_s = jacobian_frame(&step.frame, shape, &mid, &post, state.side)?;
    let a = a_s * a_v;
    let q_hat = process_noise_hat(noise, &post, state.side);
    let p = symmetrize(&(&a * &state.p * a.transpose() + q_hat));
    Ok(FilterState {
        est: post,
        p,
        side: state.side,
    })
}

/// Propagation through step `n` of a system.
pub fn propagate_system<T: Real>(
    state: &FilterState<T>,
    system: &TwoFramesSystem<T>,
    noise: &NoiseModel<T>,
    n: usize,
) -> Result<FilterState<T>> {
    propagate(state, &system.step(n), noise)
}

/// Kalman gain `K = P Hᵀ S⁻¹` with `S = H P Hᵀ + N̂`, solved by Cholesky.
pub fn kalman_gain<T: Real>(
    p: &DMatrix<T>,
    h: &DMatrix<T>,
    n_hat: &DMatrix<T>,
) -> Result<DMatrix<T>> {
    let s = symmetrize(&(h * p * h.transpose() + n_hat));
    let eig = s.clone().symmetric_eigen();
    let max = eig.eigenvalues.max();
    let min = eig.eigenvalues.min();
    let cond = if min > T::zero() {
        to_f64(max / min)
    } else {
        f64::INFINITY
    };
    if !(cond <= MAX_INNOVATION_CONDITION) {
        return Err(TfgError::SingularInnovationCovariance(cond));
    }
    let chol = s
        .cholesky()
        .ok_or(TfgError::SingularInnovationCovariance(cond))?;
    let hp = h * p;
    Ok(chol.solve(&hp).transpose())
}

/// Update with correction `L = exp(K z)`: `χ̂ ∘ L` on the left side,
/// `L ∘ χ̂` on the right side, then `P ← (I − K H) P`.
pub fn update<T: Real>(
    state: &FilterState<T>,
    om: &OutputModel<T>,
    noise: &NoiseModel<T>,
    measured: &DVector<T>,
) -> Result<FilterState<T>> {
    let shape = state.est.shape();
    let z = innovation(om, &state.est, measured, state.side)?;
    let h = jacobian_output(om, shape, state.side)?;
    let (_, n_hat) = noise_hat(noise, &state.est, state.side, om.dim())?;
    let k = kalman_gain(&state.p, &h, &n_hat)?;
    let delta = TfgTangent::from_vector(shape, &(&k * z))?;
    let l = exp_tfg(&delta);
    let est = match state.side {
        ErrorSide::Left => state.est.compose_unchecked(&l),
        ErrorSide::Right => l.compose_unchecked(&state.est),
    }
    .orthonormalized();
    let n = shape.dim();
    let p = symmetrize(&((DMatrix::identity(n, n) - &k * h) * &state.p));
    Ok(FilterState {
        est,
        p,
        side: state.side,
    })
}

fn require_natural<T: Real>(step: &StepDynamics<T>) -> Result<()> {
    match step.frame {
        FrameDynamics::Natural { .. } => Ok(()),
        FrameDynamics::Generic(_) => Err(TfgError::Unsupported(
            "state-independent error propagation needs natural frame dynamics".into(),
        )),
    }
}

/// Exact error propagation, abstract form:
/// `E ← φ(Id)⁻¹ ∘ φ(E)` (left) or `e ← φ(e) ∘ φ(Id)⁻¹` (right).
pub fn error_propagate<T: Real>(
    err: &TfgElement<T>,
    step: &StepDynamics<T>,
    side: ErrorSide,
) -> Result<TfgElement<T>> {
    require_natural(step)?;
    let phi_id_inv = step.apply(&TfgElement::identity(err.shape())).inverse();
    let phi_err = step.apply(err);
    Ok(match side {
        ErrorSide::Left => phi_id_inv.compose_unchecked(&phi_err),
        ErrorSide::Right => phi_err.compose_unchecked(&phi_id_inv),
    })
}

/// Exact error propagation, component form.
///
/// Vector step, left:
/// `E^x ← F E^x + C E^R*E^X + E^R*ū − ū`,
/// `E^X ← Φ E^X + d̄ − (E^R)⁻¹*d̄ + Γ (E^R)⁻¹*E^x`.
///
/// Vector step, right:
/// `e^x ← F e^x + C e^R*e^X + d − e^R*d`,
/// `e^X ← Φ e^X + Γ (e^R)⁻¹*e^x + (e^R)⁻¹*u − u`.
///
/// Frame step, left: `E^R ← Ω⁻¹ E^R Ω`, `E^x ← Ω⁻¹O⁻¹ * E^x`.
/// Frame step, right: `e^R ← O e^R O⁻¹`, `e^X ← OΩ * e^X`.
pub fn error_propagate_components<T: Real>(
    err: &TfgElement<T>,
    step: &StepDynamics<T>,
    side: ErrorSide,
) -> Result<TfgElement<T>> {
    let (o, omega) = match &step.frame {
        FrameDynamics::Natural { o, omega } => (o, omega),
        FrameDynamics::Generic(_) => {
            return Err(TfgError::Unsupported(
                "component error recursion needs natural frame dynamics".into(),
            ))
        }
    };
    let vd = &step.vector;
    let e_r = &err.rot;
    let e_r_inv = e_r.inverse();
    let mid = match side {
        ErrorSide::Left => TfgElement {
            rot: e_r.clone(),
            fixed: &vd.f * &err.fixed + &vd.c * act(e_r, &err.body) + act(e_r, &vd.body_input)
                - &vd.body_input,
            body: &vd.phi * &err.body + &vd.body_drift - act(&e_r_inv, &vd.body_drift)
                + &vd.gamma * act(&e_r_inv, &err.fixed),
        },
        ErrorSide::Right => TfgElement {
            rot: e_r.clone(),
            fixed: &vd.f * &err.fixed + &vd.c * act(e_r, &err.body) + &vd.fixed_drift
                - act(e_r, &vd.fixed_drift),
            body: &vd.phi * &err.body
                + &vd.gamma * act(&e_r_inv, &err.fixed)
                + act(&e_r_inv, &vd.fixed_input)
                - &vd.fixed_input,
        },
    };
    Ok(match side {
        ErrorSide::Left => {
            let w_inv = omega.inverse();
            TfgElement {
                rot: w_inv.compose(&mid.rot).compose(omega),
                fixed: act(&w_inv.compose(&o.inverse()), &mid.fixed),
                body: mid.body,
            }
        }
        ErrorSide::Right => TfgElement {
            rot: o.compose(&mid.rot).compose(&o.inverse()),
            fixed: mid.fixed,
            body: act(&o.compose(omega), &mid.body),
        },
    })
}

/// Exact error propagation for any dynamics, from the estimate: the true
/// state is rebuilt from the error, both are propagated, and the error is
/// formed again.
pub fn error_propagate_at<T: Real>(
    err: &TfgElement<T>,
    est: &TfgElement<T>,
    step: &StepDynamics<T>,
    side: ErrorSide,
) -> TfgElement<T> {
    let truth = match side {
        ErrorSide::Left => est.compose_unchecked(err),
        ErrorSide::Right => err.compose_unchecked(est),
    };
    let (t, e) = (step.apply(&truth), step.apply(est));
    match side {
        ErrorSide::Left => e.inverse().compose_unchecked(&t),
        ErrorSide::Right => t.compose_unchecked(&e.inverse()),
    }
}

/// Exact error update, abstract form: `L⁻¹ ∘ E` (left) or `e ∘ L⁻¹` (right).
pub fn error_update<T: Real>(
    err: &TfgElement<T>,
    l: &TfgElement<T>,
    side: ErrorSide,
) -> TfgElement<T> {
    match side {
        ErrorSide::Left => l.inverse().compose_unchecked(err),
        ErrorSide::Right => err.compose_unchecked(&l.inverse()),
    }
}

/// Exact error update, component form.
///
/// Left: `E^R ← (L^R)⁻¹E^R`, `E^x ← (L^R)⁻¹*(E^x − L^x)`,
/// `E^X ← E^X − (E^R)⁻¹L^R * L^X`.
///
/// Right: `e^R ← e^R (L^R)⁻¹`, `e^x ← e^x − e^R (L^R)⁻¹ * L^x`,
/// `e^X ← L^R * (e^X − L^X)`.
pub fn error_update_components<T: Real>(
    err: &TfgElement<T>,
    l: &TfgElement<T>,
    side: ErrorSide,
) -> TfgElement<T> {
    let l_inv = l.rot.inverse();
    match side {
        ErrorSide::Left => TfgElement {
            rot: l_inv.compose(&err.rot),
            fixed: act(&l_inv, &(&err.fixed - &l.fixed)),
            body: &err.body - act(&err.rot.inverse().compose(&l.rot), &l.body),
        },
        ErrorSide::Right => TfgElement {
            rot: err.rot.compose(&l_inv),
            fixed: &err.fixed - act(&err.rot.compose(&l_inv), &l.fixed),
            body: act(&l.rot, &(&err.body - &l.body)),
        },
    }
}
