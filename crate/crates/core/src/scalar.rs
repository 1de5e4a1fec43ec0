//! Scalar abstraction shared by every numerical module.
//!
//! All math is written against [`Scalar`], which is implemented for `f32`
//! and `f64`. Tolerances are specified as `f64` literals tuned for double
//! precision and widened through [`Scalar::tol`] when the backing type has
//! a larger machine epsilon.

use nalgebra::{DMatrix, DVector, RealField};
use num_complex::Complex;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real floating-point type usable as the base field of the library.
pub trait Scalar: RealField + Copy + FromPrimitive + ToPrimitive + Send + Sync + 'static {
    /// Machine epsilon of the type, as `f64`.
    const EPS: f64;

    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("finite literal")
    }

    /// Converts back to `f64` for reporting.
    #[inline]
    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    /// A tolerance of `x` (given for double precision) adapted to this type.
    #[inline]
    fn tol(x: f64) -> Self {
        Self::lit(x.max(256.0 * Self::EPS))
    }
}

impl Scalar for f32 {
    const EPS: f64 = f32::EPSILON as f64;
}

impl Scalar for f64 {
    const EPS: f64 = f64::EPSILON;
}

/// Complex number over a [`Scalar`].
pub type C<T> = Complex<T>;
/// Dense complex matrix.
pub type CMat<T> = DMatrix<Complex<T>>;
/// Dense complex column vector.
pub type CVec<T> = DVector<Complex<T>>;

#[inline]
pub(crate) fn cplx<T: Scalar>(re: f64, im: f64) -> Complex<T> {
    Complex::new(T::lit(re), T::lit(im))
}

#[inline]
pub(crate) fn creal<T: Scalar>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}

/// `e^{i x}`.
#[inline]
pub fn cis<T: Scalar>(x: T) -> Complex<T> {
    Complex::new(x.cos(), x.sin())
}

/// Reduces an angle to `(-π, π]`.
pub fn wrap_phase<T: Scalar>(x: T) -> T {
    let two_pi = T::two_pi();
    let mut r = x % two_pi;
    if r > T::pi() {
        r -= two_pi;
    } else if r <= -T::pi() {
        r += two_pi;
    }
    r
}

/// Distance between two angles on the circle, in `[0, π]`.
pub fn phase_distance<T: Scalar>(a: T, b: T) -> T {
    wrap_phase(a - b).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn wrap_range() {
        assert_eq!(wrap_phase(PI), PI);
        assert!((wrap_phase(-PI) - PI).abs() < 1e-15);
        assert!((wrap_phase(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_phase(2.5 * PI) - 0.5 * PI).abs() < 1e-12);
        assert!((wrap_phase(-0.75 * PI) + 0.75 * PI).abs() < 1e-15);
        assert!((wrap_phase(7.0f32) - (7.0 - 2.0 * std::f32::consts::PI)).abs() < 1e-5);
    }

    #[test]
    fn tolerance_widens_for_single_precision() {
        assert_eq!(f64::tol(1e-12), 1e-12);
        assert!(f32::tol(1e-12) > 1e-6);
    }
}
