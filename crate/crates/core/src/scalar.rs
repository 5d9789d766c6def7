//! Scalar abstraction: all core math is generic over the real field backing
//! the complex matrices, so the same routines run in `f32` or `f64`.

use nalgebra::RealField;
use num_complex::Complex;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real scalar type the library is generic over.
pub trait Real: RealField + FromPrimitive + ToPrimitive + Copy {}
impl<T: RealField + FromPrimitive + ToPrimitive + Copy> Real for T {}

/// Convert an `f64` literal (tolerances, physical parameters) into `T`.
#[inline]
pub fn re<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 -> scalar conversion")
}

/// Convert back to `f64` for reporting.
#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Complex number from `f64` parts.
#[inline]
pub fn cplx<T: Real>(r: f64, i: f64) -> Complex<T> {
    Complex::new(re(r), re(i))
}

/// The imaginary unit.
#[inline]
pub fn i<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::one())
}

/// Complex zero.
#[inline]
pub fn czero<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

/// Complex one.
#[inline]
pub fn cone<T: Real>() -> Complex<T> {
    Complex::new(T::one(), T::zero())
}

/// |z| without requiring `num_traits::Float` on the scalar.
pub fn cnorm<T: Real>(z: Complex<T>) -> T {
    (z.re * z.re + z.im * z.im).sqrt()
}

/// e^z without requiring `num_traits::Float` on the scalar.
pub fn cexp<T: Real>(z: Complex<T>) -> Complex<T> {
    let m = z.re.exp();
    Complex::new(m * z.im.cos(), m * z.im.sin())
}
