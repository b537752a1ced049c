//! The scalar abstraction shared by every module.

use std::fmt::{Display, LowerExp};

use nalgebra::RealField;
use num_complex::Complex;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real scalar the library is generic over. Implemented for `f32` and `f64`.
///
/// `RealField` supplies the transcendental functions; `num_traits::Float` is
/// deliberately not required because its methods collide with `RealField`'s.
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + LowerExp + Display + Send + Sync + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

pub type C<T> = Complex<T>;

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in scalar type")
}

#[inline]
pub fn cplx<T: Real>(re: T, im: T) -> C<T> {
    Complex::new(re, im)
}

#[inline]
pub fn creal<T: Real>(re: T) -> C<T> {
    Complex::new(re, T::zero())
}

#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

#[inline]
pub fn abs_c<T: Real>(z: C<T>) -> T {
    (z.re * z.re + z.im * z.im).sqrt()
}

#[inline]
pub fn abs2_c<T: Real>(z: C<T>) -> T {
    z.re * z.re + z.im * z.im
}

/// Machine epsilon of `T`.
#[inline]
pub fn eps<T: Real>() -> T {
    T::default_epsilon()
}

#[inline]
pub fn pi<T: Real>() -> T {
    T::pi()
}

/// A positive floor for denominators, representable in `f32`.
#[inline]
pub fn tiny<T: Real>() -> T {
    lit(1e-30)
}
