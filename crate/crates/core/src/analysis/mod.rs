//! Diagnostics: variance bounds, the causality check on the two forms of the
//! score-function estimator, and parameter sweeps of estimator variance.

mod bounds;
mod reinforce;
mod sweep;

pub use bounds::{
    empirical_bias_variance_bound, fobg_zero_batch_probability, zobg_variance_bound, BoundInputs,
    EmpiricalBiasSpec,
};
pub use reinforce::{reinforce_forms_check, ReinforceForms};
pub use sweep::{variance_sweep, zero_batch_rate, SweepRecord, SweepResult, SweepSettings};
