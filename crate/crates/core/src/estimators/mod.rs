//! First-, zeroth- and alpha-order batched gradient estimators.

mod batch;
mod bernstein;
mod interpolation;

pub use batch::{baseline_value, fobg, zeroth_order_sample, zobg, EstimatorKind, GradientBatch};
pub use bernstein::{bernstein_epsilon, bernstein_tail, default_r, empirical_second_moment};
pub use interpolation::{aobg, interpolation_alpha, AlphaDecision};
