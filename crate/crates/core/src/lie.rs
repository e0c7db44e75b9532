//! Rotation groups SO(2) and SO(3).
//!
//! Rotations are stored as dense `d × d` matrices. Lie-algebra coordinates are
//! a length-1 vector (planar angle) for `d = 2` and a rotation vector for
//! `d = 3`; generic code refers to the algebra dimension as `d'`.
//!
//! Multivectors are flat vectors of `N` stacked `d`-vectors, and rotations act
//! on them block by block.

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, TfgError};
use crate::scalar::{lit, Real};

/// Flat stack of `d`-vectors.
pub type MultiVector<T> = DVector<T>;

/// Lie-algebra coordinates of a rotation.
pub type AlgebraVector<T> = DVector<T>;

/// Dimension of the Lie algebra of SO(d).
pub fn algebra_dim(d: usize) -> usize {
    if d == 2 {
        1
    } else {
        3
    }
}

/// Element of SO(2) or SO(3).
#[derive(Clone, Debug, PartialEq)]
pub struct Rotation<T: Real> {
    m: DMatrix<T>,
}

impl<T: Real> Rotation<T> {
    pub fn identity(d: usize) -> Self {
        assert!(d == 2 || d == 3, "rotation dimension must be 2 or 3");
        Self {
            m: DMatrix::identity(d, d),
        }
    }

    /// Checks orthonormality and orientation before wrapping `m`.
    pub fn from_matrix(m: DMatrix<T>) -> Result<Self> {
        let d = m.nrows();
        if !(d == 2 || d == 3) || m.ncols() != d {
            return Err(TfgError::NotRotation(format!(
                "expected 2x2 or 3x3, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let tol = T::rotation_tolerance();
        let ortho = (m.transpose() * &m - DMatrix::identity(d, d)).amax();
        let det = m.determinant();
        if ortho > tol || (det - T::one()).abs() > tol {
            return Err(TfgError::NotRotation(format!(
                "orthonormality residual {:.3e}, determinant {:.6}",
                crate::scalar::to_f64(ortho),
                crate::scalar::to_f64(det)
            )));
        }
        Ok(Self { m })
    }

    /// Wraps `m` without checking; the caller guarantees it is a rotation.
    pub fn from_matrix_unchecked(m: DMatrix<T>) -> Self {
        Self { m }
    }

    /// Planar rotation by `theta`.
    pub fn planar(theta: T) -> Self {
        let (s, c) = theta.sin_cos();
        Self {
            m: DMatrix::from_row_slice(2, 2, &[c, -s, s, c]),
        }
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.m
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn algebra_dim(&self) -> usize {
        algebra_dim(self.dim())
    }

    pub fn inverse(&self) -> Self {
        Self {
            m: self.m.transpose(),
        }
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self {
            m: &self.m * &other.m,
        }
    }

    /// Rotates a single `d`-vector.
    pub fn rotate(&self, v: &DVector<T>) -> DVector<T> {
        &self.m * v
    }

    /// Nearest rotation in Frobenius norm (polar projection).
    pub fn orthonormalized(&self) -> Self {
        let d = self.dim();
        let svd = self.m.clone().svd(true, true);
        let u = svd.u.expect("svd u");
        let v_t = svd.v_t.expect("svd v_t");
        let mut r = &u * &v_t;
        if r.determinant() < T::zero() {
            let mut flip = DMatrix::identity(d, d);
            flip[(d - 1, d - 1)] = -T::one();
            r = &u * flip * &v_t;
        }
        Self { m: r }
    }

    /// Rotation angle in `[0, π]`.
    pub fn angle(&self) -> T {
        if self.dim() == 2 {
            self.m[(1, 0)].atan2(self.m[(0, 0)]).abs()
        } else {
            let c = (self.m.trace() - T::one()) * lit(0.5);
            let s = vee(&(&self.m - self.m.transpose())).norm() * lit(0.5);
            s.atan2(c)
        }
    }
}

/// Skew-symmetric matrix with `skew(b) * c = b × c`.
pub fn skew<T: Real>(b: &[T]) -> DMatrix<T> {
    assert_eq!(b.len(), 3, "skew expects a 3-vector");
    let z = T::zero();
    DMatrix::from_row_slice(3, 3, &[z, -b[2], b[1], b[2], z, -b[0], -b[1], b[0], z])
}

/// Inverse of [`skew`] applied to the antisymmetric part convention
/// `vee(S) = (S21, S02, S10)`.
fn vee<T: Real>(s: &DMatrix<T>) -> DVector<T> {
    DVector::from_vec(vec![s[(2, 1)], s[(0, 2)], s[(1, 0)]])
}

/// Planar quarter-turn `J = ρ(π/2)`.
pub fn quarter_turn<T: Real>() -> DMatrix<T> {
    DMatrix::from_row_slice(2, 2, &[T::zero(), -T::one(), T::one(), T::zero()])
}

/// Algebra element as a `d × d` generator.
pub fn hat<T: Real>(xi: &AlgebraVector<T>) -> DMatrix<T> {
    match xi.len() {
        1 => quarter_turn::<T>() * xi[0],
        3 => skew(xi.as_slice()),
        n => panic!("algebra vector must have length 1 or 3, got {n}"),
    }
}

fn check_algebra<T: Real>(xi: &AlgebraVector<T>) -> Result<()> {
    if xi.len() == 1 || xi.len() == 3 {
        Ok(())
    } else {
        Err(TfgError::ShapeMismatch(format!(
            "algebra vector must have length 1 or 3, got {}",
            xi.len()
        )))
    }
}

/// `(sin θ/θ, (1 − cos θ)/θ², (θ − sin θ)/θ³)` with Taylor fallback.
fn rodrigues_coefficients<T: Real>(theta: T) -> (T, T, T) {
    if theta < T::small_angle() {
        let t2 = theta * theta;
        let t4 = t2 * t2;
        (
            T::one() - t2 / lit(6.0) + t4 / lit(120.0),
            lit::<T>(0.5) - t2 / lit(24.0) + t4 / lit(720.0),
            lit::<T>(1.0 / 6.0) - t2 / lit(120.0) + t4 / lit(5040.0),
        )
    } else {
        let (s, c) = theta.sin_cos();
        let t2 = theta * theta;
        (s / theta, (T::one() - c) / t2, (theta - s) / (t2 * theta))
    }
}

/// Exponential map of SO(2) (`len(ξ) = 1`) or SO(3) (`len(ξ) = 3`).
pub fn exp_rot<T: Real>(xi: &AlgebraVector<T>) -> Rotation<T> {
    check_algebra(xi).expect("exp_rot");
    if xi.len() == 1 {
        return Rotation::planar(xi[0]);
    }
    let theta = xi.norm();
    let (a, b, _) = rodrigues_coefficients(theta);
    let k = skew(xi.as_slice());
    let m = DMatrix::identity(3, 3) + &k * a + &k * &k * b;
    Rotation { m }
}

/// Principal logarithm of a rotation.
pub fn log_rot<T: Real>(r: &Rotation<T>) -> Result<AlgebraVector<T>> {
    let m = r.matrix();
    if r.dim() == 2 {
        return Ok(DVector::from_element(1, m[(1, 0)].atan2(m[(0, 0)])));
    }
    let w = vee(&(m - m.transpose()));
    let s = w.norm() * lit(0.5);
    let c = (m.trace() - T::one()) * lit(0.5);
    let theta = s.atan2(c);
    if T::pi() - theta < lit(1e-6) {
        return Err(TfgError::AngleNearPi);
    }
    let factor = if theta < T::small_angle() {
        let t2 = theta * theta;
        lit::<T>(0.5) + t2 / lit(12.0) + t2 * t2 * lit(7.0 / 720.0)
    } else {
        theta / (lit::<T>(2.0) * s)
    };
    Ok(w * factor)
}

/// Adjoint of `R` on its Lie algebra: `R` itself for SO(3), `1` for SO(2).
pub fn adjoint<T: Real>(r: &Rotation<T>) -> DMatrix<T> {
    if r.dim() == 2 {
        DMatrix::identity(1, 1)
    } else {
        r.matrix().clone()
    }
}

/// The `ν_d` matrix: translation factor of the exponential.
pub fn nu<T: Real>(xi: &AlgebraVector<T>) -> DMatrix<T> {
    check_algebra(xi).expect("nu");
    if xi.len() == 1 {
        let theta = xi[0];
        let (a, b, _) = rodrigues_coefficients(theta.abs());
        // (1 − cos θ)/θ is odd in θ
        return DMatrix::identity(2, 2) * a + quarter_turn::<T>() * (b * theta);
    }
    let theta = xi.norm();
    let (_, b, c) = rodrigues_coefficients(theta);
    let k = skew(xi.as_slice());
    DMatrix::identity(3, 3) + &k * b + &k * &k * c
}

/// Right Jacobian of SO(3): `exp(α + β) ≈ exp(α) exp(J̄(α) β)`.
///
/// For SO(2) the group is abelian and the Jacobian is `1`.
pub fn right_jacobian<T: Real>(mu: &AlgebraVector<T>) -> DMatrix<T> {
    check_algebra(mu).expect("right_jacobian");
    if mu.len() == 1 {
        return DMatrix::identity(1, 1);
    }
    let theta = mu.norm();
    let (_, b, c) = rodrigues_coefficients(theta);
    let k = skew(mu.as_slice());
    DMatrix::identity(3, 3) - &k * b + &k * &k * c
}

fn check_multivector<T: Real>(d: usize, w: &MultiVector<T>) -> Result<()> {
    if w.len() % d == 0 {
        Ok(())
    } else {
        Err(TfgError::ShapeMismatch(format!(
            "multivector length {} is not a multiple of {d}",
            w.len()
        )))
    }
}

/// Term-by-term action `R * (w₁, …, w_N) = (R w₁, …, R w_N)`.
pub fn act<T: Real>(r: &Rotation<T>, w: &MultiVector<T>) -> MultiVector<T> {
    let d = r.dim();
    check_multivector(d, w).expect("act");
    let mut out = DVector::zeros(w.len());
    for i in (0..w.len()).step_by(d) {
        out.rows_mut(i, d).copy_from(&(r.matrix() * w.rows(i, d)));
    }
    out
}

/// Matrix of the term-by-term action on `n` stacked vectors.
pub fn rep_matrix<T: Real>(r: &Rotation<T>, n: usize) -> DMatrix<T> {
    let d = r.dim();
    let mut out = DMatrix::zeros(n * d, n * d);
    for i in 0..n {
        out.view_mut((i * d, i * d), (d, d)).copy_from(r.matrix());
    }
    out
}

/// Linear map `dg(w)` with `exp(ξ) * w = w − dg(w) ξ + O(‖ξ‖²)`.
///
/// For `d = 3` each block is `(w_i)_×`; for `d = 2` each block is the column
/// `−J w_i`.
pub fn dg_operator<T: Real>(w: &MultiVector<T>, d: usize) -> DMatrix<T> {
    check_multivector(d, w).expect("dg_operator");
    let n = w.len() / d;
    let mut out = DMatrix::zeros(w.len(), algebra_dim(d));
    for i in 0..n {
        let block = w.rows(i * d, d);
        if d == 3 {
            out.view_mut((3 * i, 0), (3, 3))
                .copy_from(&skew(&[block[0], block[1], block[2]]));
        } else {
            out[(2 * i, 0)] = block[1];
            out[(2 * i + 1, 0)] = -block[0];
        }
    }
    out
}
