//! One-dimensional toy systems: the zero-cost and quadratic sanity checks,
//! the Heaviside step, and its relaxed Coulomb counterpart.

use std::marker::PhantomData;

use crate::diffcore::EnvModel;
use crate::error::{Error, Result};
use crate::scalar::{real, to_f64, Float, Scalar};
use crate::stats::normal_cdf;

/// `φ(x, u) = x`, `c ≡ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct ZeroCostEnv<T> {
    state_dim: usize,
    input_dim: usize,
    horizon: usize,
    _scalar: PhantomData<T>,
}

impl<T: Float> ZeroCostEnv<T> {
    pub fn new(state_dim: usize, input_dim: usize, horizon: usize) -> Self {
        Self {
            state_dim,
            input_dim,
            horizon,
            _scalar: PhantomData,
        }
    }
}

impl<T: Float> EnvModel<T> for ZeroCostEnv<T> {
    fn state_dim(&self) -> usize {
        self.state_dim
    }
    fn input_dim(&self) -> usize {
        self.input_dim
    }
    fn horizon(&self) -> usize {
        self.horizon
    }
    fn smooth_everywhere(&self) -> bool {
        true
    }
    fn initial_state(&self) -> Vec<T> {
        vec![T::zero(); self.state_dim]
    }
    fn step<S: Scalar<T>>(&self, _h: usize, x: &[S], _u: &[S]) -> Result<Vec<S>> {
        Ok(x.to_vec())
    }
    fn cost<S: Scalar<T>>(&self, _h: usize, _x: &[S], _u: &[S]) -> Result<S> {
        Ok(S::zero())
    }
}

/// Scalar integrator `φ(x, u) = x + u` with `c_h = q·x² + r·u²`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticEnv<T> {
    horizon: usize,
    q: T,
    r: T,
    x0: T,
}

impl<T: Float> QuadraticEnv<T> {
    pub fn new(horizon: usize, q: T, r: T) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::Config("quadratic horizon must be at least 1".into()));
        }
        if !q.is_finite() || !r.is_finite() {
            return Err(Error::Domain("quadratic weights must be finite".into()));
        }
        Ok(Self {
            horizon,
            q,
            r,
            x0: T::zero(),
        })
    }

    pub fn with_initial_state(mut self, x0: T) -> Self {
        self.x0 = x0;
        self
    }
}

impl<T: Float> EnvModel<T> for QuadraticEnv<T> {
    fn state_dim(&self) -> usize {
        1
    }
    fn input_dim(&self) -> usize {
        1
    }
    fn horizon(&self) -> usize {
        self.horizon
    }
    fn smooth_everywhere(&self) -> bool {
        true
    }
    fn initial_state(&self) -> Vec<T> {
        vec![self.x0]
    }
    fn step<S: Scalar<T>>(&self, _h: usize, x: &[S], u: &[S]) -> Result<Vec<S>> {
        Ok(vec![x[0].clone() + u[0].clone()])
    }
    fn cost<S: Scalar<T>>(&self, _h: usize, x: &[S], u: &[S]) -> Result<S> {
        Ok(x[0].square() * self.q + u[0].square() * self.r)
    }
}

/// One-step system whose cost is the Heaviside step of the input,
/// `c(u) = H(u)` with `H(0) = 1`. The derivative is zero on both sides; at
/// `u = 0` the branch rule also gives zero.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct HeavisideEnv<T> {
    _scalar: PhantomData<T>,
}

impl<T: Float> HeavisideEnv<T> {
    pub fn new() -> Self {
        Self {
            _scalar: PhantomData,
        }
    }
}

impl<T: Float> EnvModel<T> for HeavisideEnv<T> {
    fn state_dim(&self) -> usize {
        1
    }
    fn input_dim(&self) -> usize {
        1
    }
    fn horizon(&self) -> usize {
        1
    }
    fn smooth_everywhere(&self) -> bool {
        false
    }
    fn initial_state(&self) -> Vec<T> {
        vec![T::zero()]
    }
    fn step<S: Scalar<T>>(&self, _h: usize, x: &[S], _u: &[S]) -> Result<Vec<S>> {
        Ok(x.to_vec())
    }
    fn cost<S: Scalar<T>>(&self, _h: usize, _x: &[S], u: &[S]) -> Result<S> {
        Ok(if u[0].value() >= T::zero() {
            S::constant(T::one())
        } else {
            S::zero()
        })
    }
    fn on_kink(&self, _h: usize, _x: &[T], u: &[T]) -> bool {
        u[0] == T::zero()
    }
}

/// `F(θ) = E[H(θ + w)] = Φ(θ/σ)` for `w ~ N(0, σ²)`.
pub fn heaviside_smoothed<T: Float>(theta: T, sigma: T) -> Result<T> {
    if !(sigma > T::zero()) {
        return Err(Error::Domain(format!("sigma must be positive, got {sigma}")));
    }
    Ok(real(normal_cdf(to_f64(theta / sigma))))
}

/// Relaxed step `clamp(t/ν + 1/2, 0, 1)` over any scalar. Exactly at the
/// kinks `|t| = ν/2` the saturated (flat) branch is taken.
pub fn relaxed_step<T: Float, S: Scalar<T>>(t: &S, nu: T) -> S {
    let half = real::<T>(0.5);
    let s = t.value() / nu + half;
    if s <= T::zero() {
        S::zero()
    } else if s >= T::one() {
        S::constant(T::one())
    } else {
        t.clone() / nu + half
    }
}

/// Relaxed sign `2·H̄_ν(t) − 1`: odd, continuous, saturating at `±1`.
pub fn relaxed_sign<T: Float, S: Scalar<T>>(t: &S, nu: T) -> S {
    let two = real::<T>(2.0);
    let half = nu * real::<T>(0.5);
    if t.value() <= -half {
        S::constant(-T::one())
    } else if t.value() >= half {
        S::constant(T::one())
    } else {
        t.clone() * (two / nu)
    }
}

fn check_nu<T: Float>(nu: T) -> Result<()> {
    if !(nu > T::zero()) || !nu.is_finite() {
        return Err(Error::Domain(format!("slip tolerance must be positive, got {nu}")));
    }
    Ok(())
}

pub fn coulomb_relaxed<T: Float>(t: T, nu: T) -> Result<T> {
    check_nu(nu)?;
    Ok(relaxed_step(&t, nu))
}

/// `1/ν` strictly inside the linear region, 0 elsewhere (flat branch at the kinks).
pub fn coulomb_relaxed_derivative<T: Float>(t: T, nu: T) -> Result<T> {
    check_nu(nu)?;
    let half = nu * real::<T>(0.5);
    Ok(if t.abs() < half { T::one() / nu } else { T::zero() })
}

/// One-step system with cost `H̄_ν(u)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoulombEnv<T> {
    nu: T,
}

impl<T: Float> CoulombEnv<T> {
    pub fn new(nu: T) -> Result<Self> {
        check_nu(nu)?;
        Ok(Self { nu })
    }

    pub fn nu(&self) -> T {
        self.nu
    }
}

impl<T: Float> EnvModel<T> for CoulombEnv<T> {
    fn state_dim(&self) -> usize {
        1
    }
    fn input_dim(&self) -> usize {
        1
    }
    fn horizon(&self) -> usize {
        1
    }
    fn smooth_everywhere(&self) -> bool {
        false
    }
    fn initial_state(&self) -> Vec<T> {
        vec![T::zero()]
    }
    fn step<S: Scalar<T>>(&self, _h: usize, x: &[S], _u: &[S]) -> Result<Vec<S>> {
        Ok(x.to_vec())
    }
    fn cost<S: Scalar<T>>(&self, _h: usize, _x: &[S], u: &[S]) -> Result<S> {
        Ok(relaxed_step(&u[0], self.nu))
    }
    fn on_kink(&self, _h: usize, _x: &[T], u: &[T]) -> bool {
        u[0].abs() == self.nu * real::<T>(0.5)
    }
}
