//! Scalar abstraction shared by every generic routine in the crate.

use nalgebra::RealField;
use num_traits::ToPrimitive;

/// Floating-point scalar usable by the library (`f32` or `f64`).
pub trait Real: RealField + Copy + ToPrimitive {
    /// Angle below which closed forms with removable singularities switch to
    /// their Taylor expansions.
    fn small_angle() -> Self;

    /// Tolerance used when deciding whether a matrix is orthonormal.
    fn rotation_tolerance() -> Self;
}

impl Real for f64 {
    fn small_angle() -> Self {
        1e-7
    }

    fn rotation_tolerance() -> Self {
        1e-9
    }
}

impl Real for f32 {
    fn small_angle() -> Self {
        1e-2
    }

    fn rotation_tolerance() -> Self {
        1e-4
    }
}

/// Converts an `f64` literal to `T`.
#[inline]
pub fn lit<T: Real>(v: f64) -> T {
    nalgebra::convert(v)
}

/// Converts `T` to `f64` for reporting.
#[inline]
pub fn to_f64<T: Real>(v: T) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}
