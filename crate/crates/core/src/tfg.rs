//! The two-frames group `SO(d)^+_{N1,N2}`.
//!
//! An element `(R, x, X)` holds a rotation, `N1` fixed-frame vectors `x` and
//! `N2` body-frame vectors `X`. The law is
//!
//! ```text
//! (R1, x1, X1) ∘ (R2, x2, X2) = (R1 R2, x1 + R1 * x2, X2 + R2⁻¹ * X1)
//! ```

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, TfgError};
use crate::lie::{act, algebra_dim, exp_rot, hat, log_rot, nu, rep_matrix, MultiVector, Rotation};
use crate::scalar::Real;

/// `SO(d)^+_{N1,N2}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TfgShape {
    pub d: usize,
    pub n1: usize,
    pub n2: usize,
}

impl TfgShape {
    pub fn new(d: usize, n1: usize, n2: usize) -> Self {
        assert!(d == 2 || d == 3, "rotation dimension must be 2 or 3");
        Self { d, n1, n2 }
    }

    /// Dimension `d'` of the rotation algebra.
    pub fn rot_dim(&self) -> usize {
        algebra_dim(self.d)
    }

    /// Length `q = N1·d` of the fixed-frame part.
    pub fn fixed_len(&self) -> usize {
        self.n1 * self.d
    }

    /// Length `r = N2·d` of the body-frame part.
    pub fn body_len(&self) -> usize {
        self.n2 * self.d
    }

    /// Tangent dimension `d' + q + r`.
    pub fn dim(&self) -> usize {
        self.rot_dim() + self.fixed_len() + self.body_len()
    }
}

/// Group element `(R, x, X)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TfgElement<T: Real> {
    pub rot: Rotation<T>,
    pub fixed: MultiVector<T>,
    pub body: MultiVector<T>,
}

/// Lie-algebra coordinates `(ξ^R, ξ^x, ξ^X)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TfgTangent<T: Real> {
    pub rot: DVector<T>,
    pub fixed: DVector<T>,
    pub body: DVector<T>,
}

impl<T: Real> TfgTangent<T> {
    pub fn zeros(shape: TfgShape) -> Self {
        Self {
            rot: DVector::zeros(shape.rot_dim()),
            fixed: DVector::zeros(shape.fixed_len()),
            body: DVector::zeros(shape.body_len()),
        }
    }

    /// Stacked coordinates `[ξ^R; ξ^x; ξ^X]`.
    pub fn to_vector(&self) -> DVector<T> {
        let n = self.rot.len() + self.fixed.len() + self.body.len();
        let mut out = DVector::zeros(n);
        out.rows_mut(0, self.rot.len()).copy_from(&self.rot);
        out.rows_mut(self.rot.len(), self.fixed.len())
            .copy_from(&self.fixed);
        out.rows_mut(self.rot.len() + self.fixed.len(), self.body.len())
            .copy_from(&self.body);
        out
    }

    pub fn from_vector(shape: TfgShape, v: &DVector<T>) -> Result<Self> {
        if v.len() != shape.dim() {
            return Err(TfgError::ShapeMismatch(format!(
                "tangent vector of length {} for dimension {}",
                v.len(),
                shape.dim()
            )));
        }
        let (a, q) = (shape.rot_dim(), shape.fixed_len());
        Ok(Self {
            rot: v.rows(0, a).into_owned(),
            fixed: v.rows(a, q).into_owned(),
            body: v.rows(a + q, shape.body_len()).into_owned(),
        })
    }

    pub fn shape(&self) -> TfgShape {
        let d = if self.rot.len() == 1 { 2 } else { 3 };
        TfgShape::new(d, self.fixed.len() / d, self.body.len() / d)
    }
}

impl<T: Real> TfgElement<T> {
    pub fn identity(shape: TfgShape) -> Self {
        Self {
            rot: Rotation::identity(shape.d),
            fixed: DVector::zeros(shape.fixed_len()),
            body: DVector::zeros(shape.body_len()),
        }
    }

    /// Builds an element after checking the multivector lengths.
    pub fn new(rot: Rotation<T>, fixed: MultiVector<T>, body: MultiVector<T>) -> Result<Self> {
        let d = rot.dim();
        if fixed.len() % d != 0 || body.len() % d != 0 {
            return Err(TfgError::ShapeMismatch(format!(
                "multivector lengths {} and {} are not multiples of {d}",
                fixed.len(),
                body.len()
            )));
        }
        Ok(Self { rot, fixed, body })
    }

    pub fn shape(&self) -> TfgShape {
        let d = self.rot.dim();
        TfgShape::new(d, self.fixed.len() / d, self.body.len() / d)
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.shape() == other.shape() {
            Ok(())
        } else {
            Err(TfgError::ShapeMismatch(format!(
                "{:?} vs {:?}",
                self.shape(),
                other.shape()
            )))
        }
    }

    /// Group law `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(self.compose_unchecked(other))
    }

    pub(crate) fn compose_unchecked(&self, other: &Self) -> Self {
        Self {
            rot: self.rot.compose(&other.rot),
            fixed: &self.fixed + act(&self.rot, &other.fixed),
            body: &other.body + act(&other.rot.inverse(), &self.body),
        }
    }

    /// `(R⁻¹, −R⁻¹ * x, −R * X)`.
    pub fn inverse(&self) -> Self {
        let r_inv = self.rot.inverse();
        Self {
            fixed: -act(&r_inv, &self.fixed),
            body: -act(&self.rot, &self.body),
            rot: r_inv,
        }
    }

    /// Distance used by residual checks: Frobenius on `R`, Euclidean on `x`
    /// and `X`, summed.
    pub fn distance(&self, other: &Self) -> T {
        (self.rot.matrix() - other.rot.matrix()).norm()
            + (&self.fixed - &other.fixed).norm()
            + (&self.body - &other.body).norm()
    }

    /// Projects `R` back onto the rotation group.
    pub fn orthonormalized(mut self) -> Self {
        self.rot = self.rot.orthonormalized();
        self
    }
}

fn apply_blockwise<T: Real>(m: &DMatrix<T>, w: &DVector<T>) -> DVector<T> {
    let d = m.nrows();
    let mut out = DVector::zeros(w.len());
    for i in (0..w.len()).step_by(d) {
        out.rows_mut(i, d).copy_from(&(m * w.rows(i, d)));
    }
    out
}

/// Exponential map: `R = exp(ξ^R)`, `x_i = ν(ξ^R) ξ^x_i`, `X_j = ν(−ξ^R) ξ^X_j`.
pub fn exp_tfg<T: Real>(xi: &TfgTangent<T>) -> TfgElement<T> {
    let nu_plus = nu(&xi.rot);
    let nu_minus = nu(&(-&xi.rot));
    TfgElement {
        rot: exp_rot(&xi.rot),
        fixed: apply_blockwise(&nu_plus, &xi.fixed),
        body: apply_blockwise(&nu_minus, &xi.body),
    }
}

/// Inverse of [`exp_tfg`] on the principal domain.
pub fn log_tfg<T: Real>(a: &TfgElement<T>) -> Result<TfgTangent<T>> {
    let rot = log_rot(&a.rot)?;
    let solve = |m: DMatrix<T>, w: &DVector<T>| -> Result<DVector<T>> {
        let lu = m.lu();
        let d = lu.l().nrows();
        let mut out = DVector::zeros(w.len());
        for i in (0..w.len()).step_by(d) {
            let block = lu
                .solve(&w.rows(i, d).into_owned())
                .ok_or(TfgError::SingularNu)?;
            out.rows_mut(i, d).copy_from(&block);
        }
        Ok(out)
    };
    let fixed = solve(nu(&rot), &a.fixed)?;
    let body = solve(nu(&(-&rot)), &a.body)?;
    Ok(TfgTangent { rot, fixed, body })
}

/// Homomorphic embedding into square matrices of size `q + r + 2`:
///
/// ```text
/// [ rep(R)  x  0       0         ]
/// [ 0       1  0       0         ]
/// [ 0       0  rep(R)  rep(R) X  ]
/// [ 0       0  0       1         ]
/// ```
pub fn embed_matrix<T: Real>(a: &TfgElement<T>) -> DMatrix<T> {
    let shape = a.shape();
    let (q, r) = (shape.fixed_len(), shape.body_len());
    let n = q + r + 2;
    let mut m = DMatrix::zeros(n, n);
    let rep_q = rep_matrix(&a.rot, shape.n1);
    let rep_r = rep_matrix(&a.rot, shape.n2);
    m.view_mut((0, 0), (q, q)).copy_from(&rep_q);
    m.view_mut((0, q), (q, 1)).copy_from(&a.fixed);
    m[(q, q)] = T::one();
    m.view_mut((q + 1, q + 1), (r, r)).copy_from(&rep_r);
    m.view_mut((q + 1, q + 1 + r), (r, 1))
        .copy_from(&(&rep_r * &a.body));
    m[(n - 1, n - 1)] = T::one();
    m
}

/// Reads an element back from its embedding.
pub fn unembed_matrix<T: Real>(m: &DMatrix<T>, shape: TfgShape) -> Result<TfgElement<T>> {
    let (d, q, r) = (shape.d, shape.fixed_len(), shape.body_len());
    let n = q + r + 2;
    if m.shape() != (n, n) {
        return Err(TfgError::ShapeMismatch(format!(
            "embedding of {shape:?} is {n}x{n}, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let block = if q > 0 {
        m.view((0, 0), (d, d)).into_owned()
    } else {
        m.view((q + 1, q + 1), (d, d)).into_owned()
    };
    let rot = if q + r == 0 {
        Rotation::identity(d)
    } else {
        Rotation::from_matrix_unchecked(block)
    };
    let fixed = m.view((0, q), (q, 1)).column(0).into_owned();
    let body = act(
        &rot.inverse(),
        &m.view((q + 1, q + 1 + r), (r, 1)).column(0).into_owned(),
    );
    Ok(TfgElement { rot, fixed, body })
}

/// Image of a tangent vector in the Lie algebra of the embedding:
/// `blockdiag([[rep(ξ^R), ξ^x], [0, 0]], [[rep(ξ^R), ξ^X], [0, 0]])`.
pub fn embed_algebra<T: Real>(xi: &TfgTangent<T>) -> DMatrix<T> {
    let shape = xi.shape();
    let (d, q, r) = (shape.d, shape.fixed_len(), shape.body_len());
    let n = q + r + 2;
    let w = hat(&xi.rot);
    let mut m = DMatrix::zeros(n, n);
    for i in 0..shape.n1 {
        m.view_mut((i * d, i * d), (d, d)).copy_from(&w);
    }
    m.view_mut((0, q), (q, 1)).copy_from(&xi.fixed);
    for j in 0..shape.n2 {
        m.view_mut((q + 1 + j * d, q + 1 + j * d), (d, d))
            .copy_from(&w);
    }
    m.view_mut((q + 1, q + 1 + r), (r, 1)).copy_from(&xi.body);
    m
}

/// Group action on an output space: `a ★ β = H^x x + R * (H^X X + β)`.
pub fn star_action<T: Real>(
    a: &TfgElement<T>,
    beta: &DVector<T>,
    h_fixed: &DMatrix<T>,
    h_body: &DMatrix<T>,
) -> DVector<T> {
    h_fixed * &a.fixed + act(&a.rot, &(h_body * &a.body + beta))
}

/// Left-invariant error `χ̂⁻¹ ∘ χ`.
pub fn left_error<T: Real>(est: &TfgElement<T>, truth: &TfgElement<T>) -> Result<TfgElement<T>> {
    est.inverse().compose(truth)
}

/// Right-invariant error `χ ∘ χ̂⁻¹`.
pub fn right_error<T: Real>(est: &TfgElement<T>, truth: &TfgElement<T>) -> Result<TfgElement<T>> {
    truth.compose(&est.inverse())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::exp_rot;
    use approx::assert_relative_eq;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    fn sample() -> TfgElement<f64> {
        TfgElement::new(
            exp_rot(&v(&[0.3, -0.2, 0.5])),
            v(&[1.0, 2.0, 3.0, 0.5, -0.5, 0.1]),
            v(&[0.2, 0.1, -0.3]),
        )
        .unwrap()
    }

    #[test]
    fn identity_rotations_reduce_to_addition() {
        let shape = TfgShape::new(3, 1, 1);
        let mut a = TfgElement::<f64>::identity(shape);
        let mut b = TfgElement::<f64>::identity(shape);
        a.fixed = v(&[1.0, 2.0, 3.0]);
        a.body = v(&[0.1, 0.2, 0.3]);
        b.fixed = v(&[-1.0, 0.5, 1.0]);
        b.body = v(&[1.0, 1.0, 1.0]);
        let c = a.compose(&b).unwrap();
        assert_eq!(c.fixed, v(&[0.0, 2.5, 4.0]));
        assert_eq!(c.body, v(&[1.1, 1.2, 1.3]));
    }

    #[test]
    fn inverse_gives_identity() {
        let a = sample();
        let id = TfgElement::identity(a.shape());
        assert!(a.compose(&a.inverse()).unwrap().distance(&id) < 1e-14);
        assert!(a.inverse().compose(&a).unwrap().distance(&id) < 1e-14);
        assert!(a.inverse().inverse().distance(&a) < 1e-15);
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let a = sample();
        let b = TfgElement::<f64>::identity(TfgShape::new(3, 1, 1));
        assert!(matches!(a.compose(&b), Err(TfgError::ShapeMismatch(_))));
    }

    #[test]
    fn exp_with_zero_rotation_is_translation() {
        let xi = TfgTangent {
            rot: v(&[0.0, 0.0, 0.0]),
            fixed: v(&[1.0, 2.0, 3.0]),
            body: v(&[4.0, 5.0, 6.0]),
        };
        let e = exp_tfg(&xi);
        assert_eq!(e.rot.matrix(), &DMatrix::identity(3, 3));
        assert_eq!(e.fixed, xi.fixed);
        assert_eq!(e.body, xi.body);
    }

    #[test]
    fn log_inverts_exp() {
        let xi = TfgTangent {
            rot: v(&[0.4, -0.3, 0.9]),
            fixed: v(&[1.0, 2.0, 3.0, -1.0, 0.0, 0.5]),
            body: v(&[4.0, 5.0, 6.0]),
        };
        let back = log_tfg(&exp_tfg(&xi)).unwrap();
        assert_relative_eq!(back.to_vector(), xi.to_vector(), epsilon = 1e-12);
    }

    #[test]
    fn embedding_of_identity_is_identity() {
        let shape = TfgShape::new(2, 2, 1);
        let e = embed_matrix(&TfgElement::<f64>::identity(shape));
        assert_eq!(e, DMatrix::identity(8, 8));
    }

    #[test]
    fn star_extracts_position() {
        let a = sample();
        let h_fixed = DMatrix::from_fn(3, 6, |i, j| if j == i + 3 { 1.0 } else { 0.0 });
        let h_body = DMatrix::zeros(3, 3);
        let y = star_action(&a, &DVector::zeros(3), &h_fixed, &h_body);
        assert_eq!(y, v(&[0.5, -0.5, 0.1]));
    }

    #[test]
    fn error_components() {
        let truth = sample();
        let mut est = sample();
        est.rot = exp_rot(&v(&[0.1, 0.0, -0.2])).compose(&truth.rot);
        est.fixed[0] += 0.3;
        est.body[2] -= 0.4;
        let left = left_error(&est, &truth).unwrap();
        let expected = &truth.body - act(&truth.rot.inverse().compose(&est.rot), &est.body);
        assert_relative_eq!(left.body, expected, epsilon = 1e-14);
        let right = right_error(&est, &truth).unwrap();
        assert_relative_eq!(
            right.body,
            act(&est.rot, &(&truth.body - &est.body)),
            epsilon = 1e-14
        );
    }
}
