use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{real, to_f64, Float};
use crate::stats::normal_cdf;

/// A `(β, Δ, S)` empirical-bias configuration: there is an event `E` of
/// probability at least `1 − β` with `‖E[z | E] − E[z]‖ ≥ Δ`, on which `z`
/// stays within `S` of `E[z | E]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalBiasSpec<T> {
    pub beta: T,
    pub delta_gap: T,
    pub s: T,
    /// `‖E[z]‖`.
    pub mean_norm: T,
}

impl<T: Float> EmpiricalBiasSpec<T> {
    /// `Δ₀ = max{0, (1 − β)·Δ − β·‖E[z]‖}`.
    pub fn delta0(&self) -> T {
        ((T::one() - self.beta) * self.delta_gap - self.beta * self.mean_norm).max(T::zero())
    }
}

/// Lower bound `Δ₀²/β` on `Var[z]` for a distribution with the given
/// empirical bias.
pub fn empirical_bias_variance_bound<T: Float>(spec: &EmpiricalBiasSpec<T>) -> Result<T> {
    if !(spec.beta > T::zero() && spec.beta < T::one()) {
        return Err(Error::Domain(format!("beta must lie in (0, 1), got {}", spec.beta)));
    }
    if !(spec.delta_gap >= T::zero()) || !(spec.mean_norm >= T::zero()) {
        return Err(Error::Domain("gap and mean norm must be nonnegative".into()));
    }
    let d0 = spec.delta0();
    Ok(d0 * d0 / spec.beta)
}

/// Bounds on the magnitude of the return and the policy Jacobian.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs<T> {
    /// `|V₁| ≤ B_V`.
    pub value_bound: T,
    /// `‖D_θπ‖ ≤ B_π`.
    pub policy_bound: T,
}

/// Upper bound `B_V²·B_π²·H·n/(N·σ²)` on the variance of a zeroth-order
/// batch of `N` samples with horizon `H` and input dimension `n`.
pub fn zobg_variance_bound<T: Float>(
    bounds: BoundInputs<T>,
    horizon: usize,
    input_dim: usize,
    sigma: T,
    n: usize,
) -> Result<T> {
    let positive = bounds.value_bound > T::zero() && bounds.policy_bound > T::zero() && sigma > T::zero();
    if !positive || horizon == 0 || input_dim == 0 || n == 0 {
        return Err(Error::Domain("variance bound inputs must be positive".into()));
    }
    let count = real::<T>((horizon * input_dim) as f64) / real::<T>(n as f64);
    Ok((bounds.value_bound * bounds.policy_bound / sigma).powi(2) * count)
}

/// Probability that every one of `N` first-order samples of the relaxed
/// Coulomb objective at `θ` has zero gradient, i.e. that no sample of
/// `θ + w` lands in the linear region `|t| < ν/2`:
/// `(1 − p_lin)^N` with `p_lin = Φ((ν/2 − θ)/σ) − Φ((−ν/2 − θ)/σ)`.
pub fn fobg_zero_batch_probability<T: Float>(theta: T, nu: T, sigma: T, n: usize) -> Result<T> {
    if !(nu > T::zero()) || !(sigma > T::zero()) {
        return Err(Error::Domain("slip tolerance and noise scale must be positive".into()));
    }
    let (theta, nu, sigma) = (to_f64(theta), to_f64(nu), to_f64(sigma));
    let p_lin = normal_cdf((0.5 * nu - theta) / sigma) - normal_cdf((-0.5 * nu - theta) / sigma);
    let miss = (1.0 - p_lin).clamp(0.0, 1.0);
    Ok(real(miss.powi(n.min(i32::MAX as usize) as i32)))
}
