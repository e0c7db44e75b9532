//! Two-frames observed systems: natural vector dynamics, natural or generic
//! frame dynamics, natural outputs, and numerical validators for the
//! commutation and group-affine hypotheses.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Result, TfgError};
use crate::lie::{act, Rotation};
use crate::sampling::{gaussian_vector, random_element, random_rotation};
use crate::scalar::{lit, Real};
use crate::tfg::{star_action, TfgElement, TfgShape};

/// Frame in which an output is expressed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Frame {
    Fixed,
    Body,
}

/// Which invariant error a filter linearises.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorSide {
    /// `χ̂⁻¹ ∘ χ`, paired with fixed-frame outputs.
    Left,
    /// `χ ∘ χ̂⁻¹`, paired with body-frame outputs.
    Right,
}

impl Frame {
    pub fn error_side(self) -> ErrorSide {
        match self {
            Frame::Fixed => ErrorSide::Left,
            Frame::Body => ErrorSide::Right,
        }
    }
}

impl ErrorSide {
    pub fn opposite(self) -> Self {
        match self {
            ErrorSide::Left => ErrorSide::Right,
            ErrorSide::Right => ErrorSide::Left,
        }
    }
}

/// Natural vector dynamics
///
/// ```text
/// x ← F x + d + R * (C X + ū)
/// X ← Φ X + d̄ + R⁻¹ * (Γ x + u)
/// ```
#[derive(Clone, Debug, PartialEq)]
pub struct VectorDynamics<T: Real> {
    pub f: DMatrix<T>,
    pub c: DMatrix<T>,
    /// `d`, added in the fixed frame.
    pub fixed_drift: DVector<T>,
    /// `ū`, expressed in the body frame and rotated into the fixed frame.
    pub body_input: DVector<T>,
    pub phi: DMatrix<T>,
    pub gamma: DMatrix<T>,
    /// `d̄`, added in the body frame.
    pub body_drift: DVector<T>,
    /// `u`, expressed in the fixed frame and rotated into the body frame.
    pub fixed_input: DVector<T>,
}

impl<T: Real> VectorDynamics<T> {
    /// `F = Φ = I`, everything else zero.
    pub fn identity(shape: TfgShape) -> Self {
        let (q, r) = (shape.fixed_len(), shape.body_len());
        Self {
            f: DMatrix::identity(q, q),
            c: DMatrix::zeros(q, r),
            fixed_drift: DVector::zeros(q),
            body_input: DVector::zeros(q),
            phi: DMatrix::identity(r, r),
            gamma: DMatrix::zeros(r, q),
            body_drift: DVector::zeros(r),
            fixed_input: DVector::zeros(r),
        }
    }

    pub fn check_shape(&self, shape: TfgShape) -> Result<()> {
        let (q, r) = (shape.fixed_len(), shape.body_len());
        let ok = self.f.shape() == (q, q)
            && self.c.shape() == (q, r)
            && self.fixed_drift.len() == q
            && self.body_input.len() == q
            && self.phi.shape() == (r, r)
            && self.gamma.shape() == (r, q)
            && self.body_drift.len() == r
            && self.fixed_input.len() == r;
        if ok {
            Ok(())
        } else {
            Err(TfgError::ShapeMismatch(format!(
                "vector dynamics do not match {shape:?}"
            )))
        }
    }

    pub fn apply(&self, chi: &TfgElement<T>) -> TfgElement<T> {
        let r_inv = chi.rot.inverse();
        TfgElement {
            rot: chi.rot.clone(),
            fixed: &self.f * &chi.fixed
                + &self.fixed_drift
                + act(&chi.rot, &(&self.c * &chi.body + &self.body_input)),
            body: &self.phi * &chi.body
                + &self.body_drift
                + act(&r_inv, &(&self.gamma * &chi.fixed + &self.fixed_input)),
        }
    }
}

/// User-supplied frame dynamics that may depend on the whole state.
pub trait FrameMap<T: Real>: Send + Sync {
    /// New rotation `s^R(χ)`.
    fn apply(&self, chi: &TfgElement<T>) -> Rotation<T>;

    /// Error Jacobian `A^s` of the frame step, given the estimate before
    /// (`pre`) and after (`post`) the step.
    fn error_jacobian(
        &self,
        pre: &TfgElement<T>,
        post: &TfgElement<T>,
        side: ErrorSide,
    ) -> Result<DMatrix<T>>;

    fn describe(&self) -> String {
        "generic frame dynamics".into()
    }
}

/// Frame dynamics `R ← O R Ω` or a state-dependent map.
#[derive(Clone)]
pub enum FrameDynamics<T: Real> {
    Natural { o: Rotation<T>, omega: Rotation<T> },
    Generic(Arc<dyn FrameMap<T>>),
}

impl<T: Real> fmt::Debug for FrameDynamics<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FrameDynamics::Natural { o, omega } => f
                .debug_struct("Natural")
                .field("o", o.matrix())
                .field("omega", omega.matrix())
                .finish(),
            FrameDynamics::Generic(m) => write!(f, "Generic({})", m.describe()),
        }
    }
}

impl<T: Real> FrameDynamics<T> {
    pub fn identity(d: usize) -> Self {
        FrameDynamics::Natural {
            o: Rotation::identity(d),
            omega: Rotation::identity(d),
        }
    }

    pub fn apply(&self, chi: &TfgElement<T>) -> TfgElement<T> {
        let rot = match self {
            FrameDynamics::Natural { o, omega } => o.compose(&chi.rot).compose(omega),
            FrameDynamics::Generic(map) => map.apply(chi),
        };
        TfgElement {
            rot,
            fixed: chi.fixed.clone(),
            body: chi.body.clone(),
        }
    }
}

/// Dynamics of one time step: vector part first, then frame part.
#[derive(Clone, Debug)]
pub struct StepDynamics<T: Real> {
    pub vector: VectorDynamics<T>,
    pub frame: FrameDynamics<T>,
}

impl<T: Real> StepDynamics<T> {
    /// `φ(χ) = s(f(χ))`.
    pub fn apply(&self, chi: &TfgElement<T>) -> TfgElement<T> {
        self.frame.apply(&self.vector.apply(chi))
    }
}

/// Natural output: `y = χ ★ B` in the fixed frame or `Y = χ⁻¹ ★ b` in the
/// body frame, with `a ★ β = H^x x + R * (H^X X + β)`.
#[derive(Clone, Debug, PartialEq)]
pub struct OutputModel<T: Real> {
    pub frame: Frame,
    pub h_fixed: DMatrix<T>,
    pub h_body: DMatrix<T>,
    pub offset: DVector<T>,
}

impl<T: Real> OutputModel<T> {
    pub fn dim(&self) -> usize {
        self.offset.len()
    }

    pub fn check_shape(&self, shape: TfgShape) -> Result<()> {
        let m = self.offset.len();
        let ok = m % shape.d == 0
            && self.h_fixed.shape() == (m, shape.fixed_len())
            && self.h_body.shape() == (m, shape.body_len());
        if ok {
            Ok(())
        } else {
            Err(TfgError::ShapeMismatch(format!(
                "output model does not match {shape:?}"
            )))
        }
    }

    /// Noise-free output at `chi`.
    pub fn evaluate(&self, chi: &TfgElement<T>) -> DVector<T> {
        match self.frame {
            Frame::Fixed => star_action(chi, &self.offset, &self.h_fixed, &self.h_body),
            Frame::Body => star_action(&chi.inverse(), &self.offset, &self.h_fixed, &self.h_body),
        }
    }
}

/// Stacks several outputs of the same frame into one tall model.
pub fn stack_outputs<T: Real>(models: &[&OutputModel<T>]) -> Result<OutputModel<T>> {
    let first = models
        .first()
        .ok_or_else(|| TfgError::ShapeMismatch("no output models to stack".into()))?;
    if models.iter().any(|m| m.frame != first.frame) {
        return Err(TfgError::FrameMismatch);
    }
    let rows: usize = models.iter().map(|m| m.dim()).sum();
    let (q, r) = (first.h_fixed.ncols(), first.h_body.ncols());
    let mut out = OutputModel {
        frame: first.frame,
        h_fixed: DMatrix::zeros(rows, q),
        h_body: DMatrix::zeros(rows, r),
        offset: DVector::zeros(rows),
    };
    let mut row = 0;
    for m in models {
        let k = m.dim();
        out.h_fixed.view_mut((row, 0), (k, q)).copy_from(&m.h_fixed);
        out.h_body.view_mut((row, 0), (k, r)).copy_from(&m.h_body);
        out.offset.rows_mut(row, k).copy_from(&m.offset);
        row += k;
    }
    Ok(out)
}

/// Step-indexed dynamics; must be pure (same index, same matrices).
pub type DynamicsProvider<T> = Arc<dyn Fn(usize) -> StepDynamics<T> + Send + Sync>;

/// A two-frames observed system.
#[derive(Clone)]
pub struct TwoFramesSystem<T: Real> {
    pub shape: TfgShape,
    pub dynamics: DynamicsProvider<T>,
    pub outputs: Vec<OutputModel<T>>,
}

impl<T: Real> fmt::Debug for TwoFramesSystem<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TwoFramesSystem")
            .field("shape", &self.shape)
            .field("outputs", &self.outputs.len())
            .finish()
    }
}

impl<T: Real> TwoFramesSystem<T> {
    /// System whose dynamics are the same at every step.
    pub fn constant(shape: TfgShape, step: StepDynamics<T>, outputs: Vec<OutputModel<T>>) -> Self {
        Self {
            shape,
            dynamics: Arc::new(move |_| step.clone()),
            outputs,
        }
    }

    pub fn step(&self, n: usize) -> StepDynamics<T> {
        (self.dynamics)(n)
    }

    /// Error side implied by the outputs; mixed frames are rejected.
    pub fn error_side(&self) -> Result<ErrorSide> {
        let first = self
            .outputs
            .first()
            .ok_or_else(|| TfgError::Config("system has no outputs".into()))?;
        if self.outputs.iter().any(|o| o.frame != first.frame) {
            return Err(TfgError::FrameMismatch);
        }
        Ok(first.frame.error_side())
    }

    pub fn check_shape(&self, n: usize) -> Result<()> {
        self.step(n).vector.check_shape(self.shape)?;
        for o in &self.outputs {
            o.check_shape(self.shape)?;
        }
        Ok(())
    }
}

/// Outcome of [`check_commutation`].
#[derive(Clone, Debug, PartialEq)]
pub struct CommutationReport {
    /// Numerical test passed.
    pub commutes: bool,
    /// Every `d × d` block is a multiple of the identity (`d = 3`) or of the
    /// form `a I + b J` (`d = 2`).
    pub block_structure: bool,
    /// Largest `‖R*(M w) − M (R*w)‖` over the trials.
    pub residual: f64,
}

/// Tests whether `m` commutes with the term-by-term action of SO(d).
pub fn check_commutation<T: Real, R: Rng + ?Sized>(
    m: &DMatrix<T>,
    d: usize,
    trials: usize,
    rng: &mut R,
) -> Result<CommutationReport> {
    if m.nrows() % d != 0 || m.ncols() % d != 0 {
        return Err(TfgError::ShapeMismatch(format!(
            "{}x{} matrix does not act on {d}-vectors",
            m.nrows(),
            m.ncols()
        )));
    }
    let mut residual = T::zero();
    for _ in 0..trials {
        let r: Rotation<T> = random_rotation(rng, d, 2.0);
        let w: DVector<T> = gaussian_vector(rng, m.ncols(), 1.0);
        let lhs = act(&r, &(m * &w));
        let rhs = m * act(&r, &w);
        residual = residual.max((lhs - rhs).norm());
    }
    let tol = lit::<T>(1e-10) * (T::one() + m.amax());
    let mut block_structure = true;
    for bi in 0..m.nrows() / d {
        for bj in 0..m.ncols() / d {
            let b = m.view((bi * d, bj * d), (d, d));
            let ok = if d == 3 {
                let a = b[(0, 0)];
                (b - DMatrix::identity(3, 3) * a).amax() <= tol
            } else {
                (b[(0, 0)] - b[(1, 1)]).abs() <= tol && (b[(0, 1)] + b[(1, 0)]).abs() <= tol
            };
            block_structure &= ok;
        }
    }
    Ok(CommutationReport {
        commutes: residual <= tol,
        block_structure,
        residual: crate::scalar::to_f64(residual),
    })
}

/// Classification of frame dynamics.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NaturalFrameClass {
    /// No fixed-frame vectors and `Ω = I`.
    CaseA,
    /// No body-frame vectors and `O = I`.
    CaseB,
    /// `O = Ω = I`.
    CaseC,
    /// `d = 2`: every `R ← O R Ω` is natural.
    Abelian,
    NotNatural,
}

impl fmt::Display for NaturalFrameClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            NaturalFrameClass::CaseA => "CaseA",
            NaturalFrameClass::CaseB => "CaseB",
            NaturalFrameClass::CaseC => "CaseC",
            NaturalFrameClass::Abelian => "Abelian",
            NaturalFrameClass::NotNatural => "NotNatural",
        };
        f.write_str(s)
    }
}

/// Outcome of [`check_natural_frame`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrameReport {
    pub class: NaturalFrameClass,
    /// Group-affine residual of the frame step alone.
    pub residual: f64,
}

/// Classifies frame dynamics and measures their group-affine residual.
pub fn check_natural_frame<T: Real, R: Rng + ?Sized>(
    fd: &FrameDynamics<T>,
    shape: TfgShape,
    trials: usize,
    rng: &mut R,
) -> FrameReport {
    let residual = check_group_affine(|chi| fd.apply(chi), shape, trials, 1.0, rng);
    let class = match fd {
        FrameDynamics::Generic(_) => NaturalFrameClass::NotNatural,
        FrameDynamics::Natural { o, omega } => {
            let tol = lit::<T>(1e-12);
            let is_id =
                |r: &Rotation<T>| (r.matrix() - DMatrix::identity(shape.d, shape.d)).amax() <= tol;
            let (o_id, omega_id) = (is_id(o), is_id(omega));
            if shape.d == 2 {
                NaturalFrameClass::Abelian
            } else if o_id && omega_id {
                NaturalFrameClass::CaseC
            } else if shape.n2 == 0 && o_id {
                NaturalFrameClass::CaseB
            } else if shape.n1 == 0 && (omega_id || shape.n2 == 0) {
                NaturalFrameClass::CaseA
            } else {
                NaturalFrameClass::NotNatural
            }
        }
    };
    FrameReport {
        class,
        residual: crate::scalar::to_f64(residual),
    }
}

/// Largest violation of `φ(χ₁∘χ₂) = φ(χ₁) ∘ φ(Id)⁻¹ ∘ φ(χ₂)` over random
/// pairs whose vector parts have spread `scale`.
pub fn check_group_affine<T: Real, R: Rng + ?Sized, F>(
    phi: F,
    shape: TfgShape,
    trials: usize,
    scale: f64,
    rng: &mut R,
) -> T
where
    F: Fn(&TfgElement<T>) -> TfgElement<T>,
{
    let phi_id_inv = phi(&TfgElement::identity(shape)).inverse();
    let mut worst = T::zero();
    for _ in 0..trials {
        let a: TfgElement<T> = random_element(rng, shape, 1.0, scale);
        let b: TfgElement<T> = random_element(rng, shape, 1.0, scale);
        let lhs = phi(&a.compose_unchecked(&b));
        let rhs = phi(&a)
            .compose_unchecked(&phi_id_inv)
            .compose_unchecked(&phi(&b));
        worst = worst.max(lhs.distance(&rhs));
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::exp_rot;
    use crate::sampling::{random_commuting_matrix, random_natural_step};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(11)
    }

    #[test]
    fn identity_vector_dynamics_is_inert() {
        let shape = TfgShape::new(3, 2, 1);
        let mut r = rng();
        let chi: TfgElement<f64> = random_element(&mut r, shape, 1.0, 1.0);
        assert_eq!(VectorDynamics::identity(shape).apply(&chi), chi);
        assert_eq!(FrameDynamics::identity(3).apply(&chi), chi);
    }

    #[test]
    fn c_coupling_rotates_body_vector() {
        let shape = TfgShape::new(3, 1, 1);
        let mut vd = VectorDynamics::<f64>::identity(shape);
        vd.c = DMatrix::identity(3, 3) * 0.01;
        let rot = exp_rot(&DVector::from_column_slice(&[0.1, 0.2, 0.3]));
        let chi = TfgElement::new(
            rot.clone(),
            DVector::zeros(3),
            DVector::from_element(3, 1.0),
        )
        .unwrap();
        let out = vd.apply(&chi);
        assert!((out.fixed - rot.rotate(&DVector::from_element(3, 0.01))).amax() < 1e-15);
    }

    #[test]
    fn scalar_blocks_commute() {
        let mut r = rng();
        let m: DMatrix<f64> = random_commuting_matrix(&mut r, 3, 2, 2);
        let rep = check_commutation(&m, 3, 20, &mut r).unwrap();
        assert!(rep.commutes && rep.block_structure);
        let z = DMatrix::<f64>::zeros(6, 6);
        assert!(check_commutation(&z, 3, 5, &mut r).unwrap().commutes);
    }

    #[test]
    fn generic_matrix_does_not_commute() {
        let mut r = rng();
        let m = DMatrix::<f64>::from_fn(6, 6, |i, j| (i * 7 + j * 3) as f64 % 5.0 - 2.0);
        let rep = check_commutation(&m, 3, 20, &mut r).unwrap();
        assert!(!rep.commutes && !rep.block_structure);
    }

    #[test]
    fn classification_cases() {
        let mut r = rng();
        let any = exp_rot(&DVector::from_column_slice(&[0.3, 0.1, -0.4]));
        let id = Rotation::identity(3);
        let slam = FrameDynamics::Natural {
            o: id.clone(),
            omega: any.clone(),
        };
        let rep = check_natural_frame(&slam, TfgShape::new(3, 4, 0), 10, &mut r);
        assert_eq!(rep.class, NaturalFrameClass::CaseB);
        assert!(rep.residual < 1e-10);
        let bad = FrameDynamics::Natural { o: id, omega: any };
        let rep = check_natural_frame(&bad, TfgShape::new(3, 1, 1), 10, &mut r);
        assert_eq!(rep.class, NaturalFrameClass::NotNatural);
        assert!(rep.residual > 1e-3);
        let planar = FrameDynamics::Natural {
            o: Rotation::planar(0.3),
            omega: Rotation::planar(-1.1),
        };
        let rep = check_natural_frame(&planar, TfgShape::new(2, 1, 1), 10, &mut r);
        assert_eq!(rep.class, NaturalFrameClass::Abelian);
        assert!(rep.residual < 1e-10);
    }

    #[test]
    fn right_translation_is_group_affine() {
        let mut r = rng();
        let shape = TfgShape::new(3, 2, 2);
        let w: TfgElement<f64> = random_element(&mut r, shape, 1.0, 1.0);
        let res = check_group_affine(|chi| chi.compose_unchecked(&w), shape, 20, 1.0, &mut r);
        assert!(res < 1e-12);
    }

    #[test]
    fn natural_step_is_group_affine() {
        let mut r = rng();
        for shape in [
            TfgShape::new(3, 2, 2),
            TfgShape::new(2, 1, 2),
            TfgShape::new(3, 3, 0),
        ] {
            let step: StepDynamics<f64> = random_natural_step(&mut r, shape);
            let res = check_group_affine(|chi| step.apply(chi), shape, 20, 1.0, &mut r);
            assert!(res < 1e-10, "{shape:?}: {res}");
        }
    }

    #[test]
    fn stacking_rejects_mixed_frames() {
        let shape = TfgShape::new(3, 1, 0);
        let a = OutputModel::<f64> {
            frame: Frame::Fixed,
            h_fixed: DMatrix::identity(3, 3),
            h_body: DMatrix::zeros(3, 0),
            offset: DVector::zeros(3),
        };
        let mut b = a.clone();
        b.frame = Frame::Body;
        assert!(a.check_shape(shape).is_ok());
        assert!(matches!(
            stack_outputs(&[&a, &b]),
            Err(TfgError::FrameMismatch)
        ));
        assert_eq!(stack_outputs(&[&a, &a]).unwrap().dim(), 6);
    }
}
