//! Rollouts with exact per-sample derivatives of the cost-to-go.

pub mod env;
pub mod noise;
pub mod policy;
pub mod rollout;

pub use env::EnvModel;
pub use noise::{derive_seed, stream_rng, NoiseModel, Stream};
pub use policy::{Policy, PolicyKind};
pub use rollout::{rollout, rollout_with_branch_gradient, rollout_with_gradient, Trajectory};
