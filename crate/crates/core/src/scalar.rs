//! Scalar abstraction shared by every numerical routine in the crate.
//!
//! All physics is written against [`Scalar`] so the same code runs in `f32`
//! and `f64`. Configuration data and file formats stay in `f64`; conversion
//! happens at the boundary through [`Scalar::of`].

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Real floating point type usable by the simulator.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal or configuration value.
    #[inline]
    fn of(value: f64) -> Self {
        Self::from_f64(value).expect("f64 is representable in every Scalar")
    }

    /// Converts a count (sites, kicks, dimensions).
    #[inline]
    fn of_usize(value: usize) -> Self {
        Self::from_usize(value).expect("usize is representable in every Scalar")
    }

    /// `base` for `f64`, widened to a few hundred ulps for narrower types.
    #[inline]
    fn tolerance(base: f64) -> Self {
        let floor = Self::epsilon() * Self::of(512.0);
        Self::of(base).max(floor)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Complex number over a [`Scalar`].
pub type C<T> = Complex<T>;

#[inline]
pub(crate) fn cplx<T: Scalar>(re: T, im: T) -> C<T> {
    Complex::new(re, im)
}

#[inline]
pub(crate) fn czero<T: Scalar>() -> C<T> {
    Complex::new(T::zero(), T::zero())
}

#[inline]
pub(crate) fn cone<T: Scalar>() -> C<T> {
    Complex::new(T::one(), T::zero())
}

/// `e^{-i·phase}`.
#[inline]
pub(crate) fn phase_factor<T: Scalar>(phase: T) -> C<T> {
    Complex::new(phase.cos(), -phase.sin())
}
