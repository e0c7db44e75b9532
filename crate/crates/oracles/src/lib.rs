//! Reference computations that deliberately share no code with the library
//! they check.
//!
//! Everything here works on plain `f64` dense matrices and is written for
//! clarity rather than speed: truncated power series, repeated square roots,
//! central differences. None of it should be used in a filter loop.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

/// Dense matrix exponential by scaling-and-squaring around a plain Taylor
/// series with `terms` terms.
pub fn expm(m: &DMatrix<f64>, terms: usize) -> DMatrix<f64> {
    let n = m.nrows();
    let norm = m.abs().row_sum().max();
    let mut squarings = 0u32;
    let mut scale = 1.0;
    while norm * scale > 0.5 {
        scale *= 0.5;
        squarings += 1;
    }
    let a = m * scale;
    let mut sum = DMatrix::identity(n, n);
    let mut term = DMatrix::identity(n, n);
    for k in 1..terms {
        term = &term * &a / k as f64;
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// Plain truncated Taylor series of the exponential, no scaling.
pub fn expm_series(m: &DMatrix<f64>, terms: usize) -> DMatrix<f64> {
    let n = m.nrows();
    let mut sum = DMatrix::identity(n, n);
    let mut term = DMatrix::identity(n, n);
    for k in 1..terms {
        term = &term * m / k as f64;
        sum += &term;
    }
    sum
}

/// Principal square root by the Denman-Beavers iteration.
pub fn sqrtm(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    let mut y = m.clone();
    let mut z = DMatrix::identity(n, n);
    for _ in 0..100 {
        let yi = y.clone().try_inverse().expect("sqrtm: singular iterate");
        let zi = z.clone().try_inverse().expect("sqrtm: singular iterate");
        let y_next = (&y + &zi) * 0.5;
        let z_next = (&z + &yi) * 0.5;
        let delta = (&y_next - &y).norm();
        y = y_next;
        z = z_next;
        if delta < 1e-15 * y.norm().max(1.0) {
            break;
        }
    }
    y
}

/// Principal matrix logarithm by inverse scaling-and-squaring: take square
/// roots until the matrix is close to the identity, sum the Mercator series,
/// then scale back.
pub fn logm(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    let mut a = m.clone();
    let mut roots = 0u32;
    while (&a - &id).norm() > 1e-3 {
        a = sqrtm(&a);
        roots += 1;
        assert!(roots < 60, "logm: square roots did not converge");
    }
    let x = &a - &id;
    let mut sum = DMatrix::zeros(n, n);
    let mut power = id.clone();
    for k in 1..40 {
        power = &power * &x;
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        sum += &power * (sign / k as f64);
    }
    sum * 2f64.powi(roots as i32)
}

/// Jacobian of `f` at `x` by central differences with step `h`.
pub fn central_jacobian<F>(f: F, x: &DVector<f64>, h: f64) -> DMatrix<f64>
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
{
    let f0 = f(x);
    let mut jac = DMatrix::zeros(f0.len(), x.len());
    for j in 0..x.len() {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[j] += h;
        xm[j] -= h;
        let col = (f(&xp) - f(&xm)) / (2.0 * h);
        jac.set_column(j, &col);
    }
    jac
}

/// Relative error `‖a − b‖_F / max(‖b‖_F, floor)`.
pub fn relative_error(a: &DMatrix<f64>, b: &DMatrix<f64>, floor: f64) -> f64 {
    (a - b).norm() / b.norm().max(floor)
}

/// `count` zero-mean Gaussian samples whose *sample* covariance equals `cov`
/// exactly (up to rounding).
///
/// Raw standard-normal draws are centred and whitened against their own
/// sample covariance, then coloured with a square root of `cov`. Comparing a
/// first-order covariance map against the empirical covariance of such
/// samples isolates the nonlinearity from sampling noise.
pub fn moment_matched_samples<R: Rng + ?Sized>(
    rng: &mut R,
    cov: &DMatrix<f64>,
    count: usize,
) -> Vec<DVector<f64>> {
    let dim = cov.nrows();
    let mut raw: Vec<DVector<f64>> = (0..count)
        .map(|_| DVector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal)))
        .collect();
    let mean = raw.iter().fold(DVector::zeros(dim), |acc, s| acc + s) / count as f64;
    for s in raw.iter_mut() {
        *s -= &mean;
    }
    let sample_cov = empirical_covariance(&raw);
    let whiten = symmetric_power(&sample_cov, -0.5);
    let colour = symmetric_power(cov, 0.5);
    let map = colour * whiten;
    raw.iter().map(|s| &map * s).collect()
}

/// `(1/n) Σ s sᵀ` for zero-mean samples.
pub fn empirical_covariance(samples: &[DVector<f64>]) -> DMatrix<f64> {
    let dim = samples[0].len();
    let mut acc = DMatrix::zeros(dim, dim);
    for s in samples {
        acc += s * s.transpose();
    }
    acc / samples.len() as f64
}

fn symmetric_power(m: &DMatrix<f64>, p: f64) -> DMatrix<f64> {
    let eig = m.clone().symmetric_eigen();
    let vals = eig
        .eigenvalues
        .map(|v| if v > 0.0 { v.powf(p) } else { 0.0 });
    &eig.eigenvectors * DMatrix::from_diagonal(&vals) * eig.eigenvectors.transpose()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn expm_of_planar_generator_is_rotation() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, -0.4, 0.4, 0.0]);
        let e = expm(&m, 30);
        assert!((e[(0, 0)] - 0.4f64.cos()).abs() < 1e-14);
        assert!((e[(1, 0)] - 0.4f64.sin()).abs() < 1e-14);
    }

    #[test]
    fn logm_inverts_expm() {
        let m = DMatrix::from_row_slice(3, 3, &[0.1, -0.3, 0.2, 0.3, 0.0, -0.5, -0.2, 0.5, 0.05]);
        let back = logm(&expm(&m, 30));
        assert!((back - m).norm() < 1e-11);
    }

    #[test]
    fn central_jacobian_of_quadratic() {
        let f = |x: &DVector<f64>| DVector::from_vec(vec![x[0] * x[1], x[1] * x[1]]);
        let x = DVector::from_vec(vec![2.0, 3.0]);
        let j = central_jacobian(f, &x, 1e-5);
        let expected = DMatrix::from_row_slice(2, 2, &[3.0, 2.0, 0.0, 6.0]);
        assert!((j - expected).norm() < 1e-8);
    }

    #[test]
    fn moment_matching_is_exact() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        let cov = DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 0.5]);
        let samples = moment_matched_samples(&mut rng, &cov, 500);
        assert!((empirical_covariance(&samples) - cov).norm() < 1e-12);
    }
}
