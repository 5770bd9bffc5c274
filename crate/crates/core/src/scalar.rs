//! Scalar abstractions.
//!
//! [`Float`] is the base real field (`f32` or `f64`). [`Scalar`] is anything a
//! simulator step can be evaluated over: the base field itself, or a
//! [`Dual`](crate::dual::Dual) carrying a tangent with respect to the policy
//! parameters. Every environment is written once, generically over `Scalar`,
//! so plain rollouts and differentiated rollouts share the same arithmetic.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use num_traits::{FloatConst, FromPrimitive, ToPrimitive};

/// floating point: f32 or f64
pub trait Float:
    num_traits::Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
}

impl Float for f32 {}
impl Float for f64 {}

/// Converts an `f64` literal into the working precision.
#[inline]
pub fn real<T: Float>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal must be representable")
}

/// Widens a working-precision value to `f64`.
#[inline]
pub fn to_f64<T: Float>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// A value that simulator code can compute with.
///
/// Branching code (contact on/off, saturation) inspects [`Scalar::value`];
/// everything else goes through the arithmetic operators and the elementary
/// functions below, which propagate tangents exactly.
pub trait Scalar<T: Float>:
    Clone
    + Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<T, Output = Self>
    + Sub<T, Output = Self>
    + Mul<T, Output = Self>
    + Div<T, Output = Self>
{
    /// Lifts a constant (zero tangent).
    fn constant(value: T) -> Self;

    /// The primal value.
    fn value(&self) -> T;

    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn tan(&self) -> Self;
    fn sqrt(&self) -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn powi(&self, n: i32) -> Self;

    fn zero() -> Self {
        Self::constant(T::zero())
    }

    fn square(&self) -> Self {
        self.clone() * self.clone()
    }

    /// True when the primal value (and any tangent) is finite.
    fn is_finite(&self) -> bool;
}

impl<T: Float> Scalar<T> for T {
    #[inline]
    fn constant(value: T) -> Self {
        value
    }
    #[inline]
    fn value(&self) -> T {
        *self
    }
    #[inline]
    fn sin(&self) -> Self {
        num_traits::Float::sin(*self)
    }
    #[inline]
    fn cos(&self) -> Self {
        num_traits::Float::cos(*self)
    }
    #[inline]
    fn tan(&self) -> Self {
        num_traits::Float::tan(*self)
    }
    #[inline]
    fn sqrt(&self) -> Self {
        num_traits::Float::sqrt(*self)
    }
    #[inline]
    fn exp(&self) -> Self {
        num_traits::Float::exp(*self)
    }
    #[inline]
    fn ln(&self) -> Self {
        num_traits::Float::ln(*self)
    }
    #[inline]
    fn powi(&self, n: i32) -> Self {
        num_traits::Float::powi(*self, n)
    }
    #[inline]
    fn is_finite(&self) -> bool {
        num_traits::Float::is_finite(*self)
    }
}

/// Sum of squares of a slice of scalars.
pub fn norm_squared<T: Float, S: Scalar<T>>(v: &[S]) -> S {
    v.iter().fold(S::zero(), |acc, x| acc + x.square())
}

/// Euclidean norm of a plain vector.
pub fn norm<T: Float>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |acc, &x| acc + x * x).sqrt()
}

/// Euclidean distance between two plain vectors.
pub fn distance<T: Float>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (&x, &y)| acc + (x - y) * (x - y))
        .sqrt()
}
