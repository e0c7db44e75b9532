//! Random rotations, group elements and natural systems for property tests,
//! validators and Monte-Carlo initialisation.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

use crate::lie::{algebra_dim, exp_rot, Rotation};
use crate::scalar::{lit, Real};
use crate::system_model::{Frame, FrameDynamics, OutputModel, StepDynamics, VectorDynamics};
use crate::tfg::{TfgElement, TfgShape, TfgTangent};

/// Vector of independent `N(0, sigma²)` draws.
pub fn gaussian_vector<T: Real, R: Rng + ?Sized>(rng: &mut R, n: usize, sigma: f64) -> DVector<T> {
    DVector::from_fn(n, |_, _| {
        let z: f64 = StandardNormal.sample(rng);
        lit(z * sigma)
    })
}

fn uniform_matrix<T: Real, R: Rng + ?Sized>(
    rng: &mut R,
    rows: usize,
    cols: usize,
    half: f64,
) -> DMatrix<T> {
    let dist = Uniform::new_inclusive(-half, half).expect("uniform bounds");
    DMatrix::from_fn(rows, cols, |_, _| lit(dist.sample(rng)))
}

/// Rotation `exp(ξ)` with `ξ ~ N(0, sigma² I)`.
pub fn random_rotation<T: Real, R: Rng + ?Sized>(rng: &mut R, d: usize, sigma: f64) -> Rotation<T> {
    exp_rot(&gaussian_vector(rng, algebra_dim(d), sigma))
}

/// Element with rotation spread `rot_sigma` and vector entries `N(0, vec_sigma²)`.
pub fn random_element<T: Real, R: Rng + ?Sized>(
    rng: &mut R,
    shape: TfgShape,
    rot_sigma: f64,
    vec_sigma: f64,
) -> TfgElement<T> {
    TfgElement {
        rot: random_rotation(rng, shape.d, rot_sigma),
        fixed: gaussian_vector(rng, shape.fixed_len(), vec_sigma),
        body: gaussian_vector(rng, shape.body_len(), vec_sigma),
    }
}

/// Tangent vector with Euclidean norm exactly `norm`.
pub fn random_tangent<T: Real, R: Rng + ?Sized>(
    rng: &mut R,
    shape: TfgShape,
    norm: f64,
) -> TfgTangent<T> {
    let mut v: DVector<T> = gaussian_vector(rng, shape.dim(), 1.0);
    let n = v.norm();
    if n > T::zero() {
        v *= lit::<T>(norm) / n;
    }
    TfgTangent::from_vector(shape, &v).expect("shape")
}

/// Block matrix whose `d × d` blocks are `α_ij I` with `α_ij ∈ [−2, 2]`;
/// such a matrix commutes with the term-by-term action.
pub fn random_commuting_matrix<T: Real, R: Rng + ?Sized>(
    rng: &mut R,
    d: usize,
    row_blocks: usize,
    col_blocks: usize,
) -> DMatrix<T> {
    let alpha: DMatrix<T> = uniform_matrix(rng, row_blocks, col_blocks, 2.0);
    alpha.kronecker(&DMatrix::identity(d, d))
}

/// Random natural vector dynamics and a natural frame step compatible with
/// `shape` (abelian for `d = 2`, otherwise the applicable degenerate case).
pub fn random_natural_step<T: Real, R: Rng + ?Sized>(
    rng: &mut R,
    shape: TfgShape,
) -> StepDynamics<T> {
    let (d, n1, n2) = (shape.d, shape.n1, shape.n2);
    let vector = VectorDynamics {
        f: random_commuting_matrix(rng, d, n1, n1),
        c: random_commuting_matrix(rng, d, n1, n2),
        fixed_drift: gaussian_vector(rng, shape.fixed_len(), 1.0),
        body_input: gaussian_vector(rng, shape.fixed_len(), 1.0),
        phi: random_commuting_matrix(rng, d, n2, n2),
        gamma: random_commuting_matrix(rng, d, n2, n1),
        body_drift: gaussian_vector(rng, shape.body_len(), 1.0),
        fixed_input: gaussian_vector(rng, shape.body_len(), 1.0),
    };
    let any = |rng: &mut R| random_rotation::<T, R>(rng, d, 1.0);
    let id = Rotation::identity(d);
    let (o, omega) = if d == 2 {
        (any(rng), any(rng))
    } else if n2 == 0 {
        (id, any(rng))
    } else if n1 == 0 {
        (any(rng), id)
    } else {
        (id.clone(), id)
    };
    StepDynamics {
        vector,
        frame: FrameDynamics::Natural { o, omega },
    }
}

/// Random natural output with `m` output vectors.
pub fn random_output<T: Real, R: Rng + ?Sized>(
    rng: &mut R,
    shape: TfgShape,
    frame: Frame,
    m: usize,
) -> OutputModel<T> {
    OutputModel {
        frame,
        h_fixed: random_commuting_matrix(rng, shape.d, m, shape.n1),
        h_body: random_commuting_matrix(rng, shape.d, m, shape.n2),
        offset: gaussian_vector(rng, m * shape.d, 1.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn tangent_has_requested_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t: TfgTangent<f64> = random_tangent(&mut rng, TfgShape::new(3, 2, 1), 0.5);
        assert!((t.to_vector().norm() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn commuting_matrix_has_block_shape() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let m: DMatrix<f64> = random_commuting_matrix(&mut rng, 3, 2, 1);
        assert_eq!(m.shape(), (6, 3));
        assert_eq!(m[(0, 1)], 0.0);
        assert_eq!(m[(0, 0)], m[(2, 2)]);
    }
}
