//! Forward-mode dual numbers with a runtime-sized tangent.
//!
//! A `Dual` is `value + Σ_j tangent[j]·ε_j`. The tangent is stored sparsely
//! in one respect only: an empty tangent stands for the zero vector, so
//! constants (initial states, injected noise, environment parameters) flow
//! through a rollout without allocating. Whenever two non-empty tangents meet
//! they must have the same length `d`.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use smallvec::SmallVec;

use crate::scalar::{Float, Scalar};

/// Inline capacity of the tangent; low-dimensional problems never touch the heap.
const INLINE: usize = 4;

type Tangent<T> = SmallVec<[T; INLINE]>;

#[derive(Clone, PartialEq)]
pub struct Dual<T: Float> {
    re: T,
    eps: Tangent<T>,
}

impl<T: Float> Dual<T> {
    /// A constant: zero tangent.
    pub fn constant(re: T) -> Self {
        Self {
            re,
            eps: SmallVec::new(),
        }
    }

    /// The `index`-th independent variable out of `dim`.
    pub fn variable(re: T, index: usize, dim: usize) -> Self {
        assert!(index < dim, "variable index {index} out of range for dim {dim}");
        let mut eps: Tangent<T> = SmallVec::from_elem(T::zero(), dim);
        eps[index] = T::one();
        Self { re, eps }
    }

    /// Seeds every entry of `values` as an independent variable.
    pub fn variables(values: &[T]) -> Vec<Self> {
        let d = values.len();
        values
            .iter()
            .enumerate()
            .map(|(j, &v)| Self::variable(v, j, d))
            .collect()
    }

    pub fn with_tangent(re: T, tangent: &[T]) -> Self {
        Self {
            re,
            eps: SmallVec::from_slice(tangent),
        }
    }

    pub fn re(&self) -> T {
        self.re
    }

    /// Stored tangent; empty means zero.
    pub fn tangent(&self) -> &[T] {
        &self.eps
    }

    /// Tangent materialised to length `dim` (zeros for constants).
    pub fn gradient(&self, dim: usize) -> Vec<T> {
        if self.eps.is_empty() {
            vec![T::zero(); dim]
        } else {
            assert_eq!(self.eps.len(), dim, "tangent length mismatch");
            self.eps.to_vec()
        }
    }

    /// Applies a unary function with derivative `slope` at `re`.
    fn chain(&self, re: T, slope: T) -> Self {
        Self {
            re,
            eps: self.eps.iter().map(|&e| slope * e).collect(),
        }
    }
}

impl<T: Float> fmt::Debug for Dual<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Dual({:?}, {:?})", self.re, self.eps.as_slice())
    }
}

impl<T: Float> fmt::Display for Dual<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {:?}ε", self.re, self.eps.as_slice())
    }
}

/// `a·x + b·y` over tangents, treating empty as zero.
fn combine<T: Float>(x: Tangent<T>, a: T, y: &[T], b: T) -> Tangent<T> {
    match (x.is_empty(), y.is_empty()) {
        (true, true) => x,
        (false, true) => {
            if a == T::one() {
                x
            } else {
                x.into_iter().map(|v| a * v).collect()
            }
        }
        (true, false) => y.iter().map(|&v| b * v).collect(),
        (false, false) => {
            assert_eq!(x.len(), y.len(), "tangent length mismatch");
            let mut x = x;
            for (xi, &yi) in x.iter_mut().zip(y) {
                *xi = a * *xi + b * yi;
            }
            x
        }
    }
}

impl<T: Float> Add for Dual<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let re = self.re + rhs.re;
        let eps = match (self.eps.is_empty(), rhs.eps.is_empty()) {
            (_, true) => self.eps,
            (true, false) => rhs.eps,
            (false, false) => {
                assert_eq!(self.eps.len(), rhs.eps.len(), "tangent length mismatch");
                let mut e = self.eps;
                for (a, &b) in e.iter_mut().zip(rhs.eps.iter()) {
                    *a += b;
                }
                e
            }
        };
        Self { re, eps }
    }
}

impl<T: Float> Sub for Dual<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let re = self.re - rhs.re;
        let eps = match (self.eps.is_empty(), rhs.eps.is_empty()) {
            (_, true) => self.eps,
            (true, false) => rhs.eps.into_iter().map(|b| -b).collect(),
            (false, false) => {
                assert_eq!(self.eps.len(), rhs.eps.len(), "tangent length mismatch");
                let mut e = self.eps;
                for (a, &b) in e.iter_mut().zip(rhs.eps.iter()) {
                    *a -= b;
                }
                e
            }
        };
        Self { re, eps }
    }
}

impl<T: Float> Mul for Dual<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let re = self.re * rhs.re;
        let eps = combine(self.eps, rhs.re, &rhs.eps, self.re);
        Self { re, eps }
    }
}

impl<T: Float> Div for Dual<T> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let re = self.re / rhs.re;
        // (a/b)' = (a' - (a/b)·b') / b
        let inv = T::one() / rhs.re;
        let eps = combine(self.eps, inv, &rhs.eps, -re * inv);
        Self { re, eps }
    }
}

impl<T: Float> Neg for Dual<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            re: -self.re,
            eps: self.eps.into_iter().map(|e| -e).collect(),
        }
    }
}

impl<T: Float> Add<T> for Dual<T> {
    type Output = Self;
    fn add(mut self, rhs: T) -> Self {
        self.re = self.re + rhs;
        self
    }
}

impl<T: Float> Sub<T> for Dual<T> {
    type Output = Self;
    fn sub(mut self, rhs: T) -> Self {
        self.re = self.re - rhs;
        self
    }
}

impl<T: Float> Mul<T> for Dual<T> {
    type Output = Self;
    fn mul(mut self, rhs: T) -> Self {
        self.re = self.re * rhs;
        for e in self.eps.iter_mut() {
            *e *= rhs;
        }
        self
    }
}

impl<T: Float> Div<T> for Dual<T> {
    type Output = Self;
    fn div(mut self, rhs: T) -> Self {
        self.re = self.re / rhs;
        for e in self.eps.iter_mut() {
            *e /= rhs;
        }
        self
    }
}

impl<T: Float> Scalar<T> for Dual<T> {
    fn constant(value: T) -> Self {
        Dual::constant(value)
    }

    fn value(&self) -> T {
        self.re
    }

    fn sin(&self) -> Self {
        self.chain(self.re.sin(), self.re.cos())
    }

    fn cos(&self) -> Self {
        self.chain(self.re.cos(), -self.re.sin())
    }

    fn tan(&self) -> Self {
        let t = self.re.tan();
        self.chain(t, T::one() + t * t)
    }

    fn sqrt(&self) -> Self {
        let s = self.re.sqrt();
        self.chain(s, T::one() / (s + s))
    }

    fn exp(&self) -> Self {
        let e = self.re.exp();
        self.chain(e, e)
    }

    fn ln(&self) -> Self {
        self.chain(self.re.ln(), T::one() / self.re)
    }

    fn powi(&self, n: i32) -> Self {
        let slope = if n == 0 {
            T::zero()
        } else {
            T::from_i32(n).unwrap() * self.re.powi(n - 1)
        };
        self.chain(self.re.powi(n), slope)
    }

    fn is_finite(&self) -> bool {
        self.re.is_finite() && self.eps.iter().all(|e| e.is_finite())
    }
}
