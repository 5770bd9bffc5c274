//! Policy-gradient estimators over differentiable simulators.
//!
//! The crate estimates `∇F(θ)` for the randomized-smoothing objective
//! `F(θ) = E_w[V₁(x₁, w, θ)]` three ways:
//!
//! * first order ([`estimators::fobg`]): average of pathwise gradients
//!   computed by forward-mode differentiation of each rollout;
//! * zeroth order ([`estimators::zobg`]): the score-function estimator, which
//!   only needs costs;
//! * alpha order ([`estimators::aobg`]): a convex blend of the two whose
//!   weight minimises variance subject to a confidence bound on bias.
//!
//! Everything numeric is generic over [`Float`] (`f32` or `f64`); the aliases
//! below fix the working precision to `f64`.

pub mod analysis;
pub mod diffcore;
pub mod dual;
pub mod envs;
pub mod error;
pub mod estimators;
pub mod matrix;
pub mod optimize;
pub mod scalar;
pub mod stats;

pub use diffcore::{EnvModel, NoiseModel, Policy, PolicyKind, Stream, Trajectory};
pub use error::{Error, Result};
pub use scalar::{Float, Scalar};

pub type Dual64 = dual::Dual<f64>;
pub type Dual32 = dual::Dual<f32>;
pub type Matrix64 = matrix::Matrix<f64>;
pub type Trajectory64 = diffcore::Trajectory<f64>;
pub type NoiseModel64 = diffcore::NoiseModel<f64>;
pub type AnyEnv64 = envs::AnyEnv<f64>;
pub type GradientBatch64 = estimators::GradientBatch<f64>;
pub type AlphaDecision64 = estimators::AlphaDecision<f64>;
pub type OptRun64 = optimize::OptRun<f64>;
