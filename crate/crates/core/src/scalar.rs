//! Scalar abstraction.

use nalgebra::{DMatrix, RealField};
use num_traits::{FromPrimitive, ToPrimitive};

/// Real scalar type the numerical code is generic over (`f32` or `f64`).
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive {}

impl Real for f32 {}
impl Real for f64 {}

/// Complex number over `T`.
pub type C<T> = num_complex::Complex<T>;

/// Dense complex matrix over `T`.
pub type CMatrix<T> = DMatrix<C<T>>;

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("literal representable in scalar type")
}

/// Complex number with zero imaginary part.
#[inline]
pub fn re<T: Real>(x: T) -> C<T> {
    C::new(x, T::zero())
}

/// A tolerance of `x`, raised to `1000 ε` for types whose round-off
/// exceeds it.
#[inline]
pub fn tol<T: Real>(x: f64) -> T {
    lit::<T>(x).max(T::default_epsilon() * lit(1e3))
}
