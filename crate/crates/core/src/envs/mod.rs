//! Benchmark systems.
//!
//! | env | discontinuity | what it shows |
//! |---|---|---|
//! | [`HeavisideEnv`] | step in the cost | first-order estimates are exactly zero |
//! | [`CoulombEnv`] | relaxed step of width ν | first-order variance grows like 1/ν |
//! | [`BallWallEnv`] | wall clearance | flat region traps first-order descent |
//! | [`MomentumTransferEnv`] | miss cliff | first-order descent falls off the cliff |
//! | [`PushingEnv`] | stiff penalty contact | first-order variance grows with stiffness |
//! | [`FrictionEnv`] | box sliding off | nearly discontinuous rollout map |
//! | [`DoublePendulumEnv`] | none (chaos) | first-order variance grows with horizon |
//! | [`TennisEnv`] | impacts | gradients through time of impact |

mod contact;
mod landscape;
mod pendulum;
mod scalar_envs;
mod tennis;

use serde::{Deserialize, Serialize};

pub use contact::{pushing_step, FrictionEnv, FrictionParams, PushingEnv, PushingParams};
pub use landscape::{
    ball_wall_cost, BallWallEnv, BallWallParams, MomentumParams, MomentumTransferEnv,
};
pub use pendulum::{double_pendulum_step, DoublePendulumEnv, PendulumDynamics, PendulumParams};
pub use scalar_envs::{
    coulomb_relaxed, coulomb_relaxed_derivative, heaviside_smoothed, relaxed_sign, relaxed_step,
    CoulombEnv, HeavisideEnv, QuadraticEnv, ZeroCostEnv,
};
pub use tennis::{tennis_step, TennisEnv, TennisParams, MAX_IMPACTS};

use crate::diffcore::{EnvModel, Policy};
use crate::error::{Error, Result};
use crate::scalar::{Float, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ZeroParams {
    pub state_dim: usize,
    pub input_dim: usize,
    pub horizon: usize,
}

impl Default for ZeroParams {
    fn default() -> Self {
        Self {
            state_dim: 1,
            input_dim: 1,
            horizon: 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadraticParams {
    pub horizon: usize,
    pub q: f64,
    pub r: f64,
    pub x0: f64,
}

impl Default for QuadraticParams {
    fn default() -> Self {
        Self {
            horizon: 1,
            q: 0.0,
            r: 1.0,
            x0: 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CoulombParams {
    pub nu: f64,
}

impl Default for CoulombParams {
    fn default() -> Self {
        Self { nu: 0.1 }
    }
}

/// Environment selection plus parameter overrides, as read from a config.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum EnvConfig {
    Zero(ZeroParams),
    Quadratic(QuadraticParams),
    Heaviside,
    Coulomb(CoulombParams),
    BallWall(BallWallParams),
    Momentum(MomentumParams),
    Pushing(PushingParams),
    Friction(FrictionParams),
    Pendulum(PendulumParams),
    Tennis(TennisParams),
}

impl EnvConfig {
    pub fn name(&self) -> &'static str {
        match self {
            EnvConfig::Zero(_) => "zero",
            EnvConfig::Quadratic(_) => "quadratic",
            EnvConfig::Heaviside => "heaviside",
            EnvConfig::Coulomb(_) => "coulomb",
            EnvConfig::BallWall(_) => "ball_wall",
            EnvConfig::Momentum(_) => "momentum",
            EnvConfig::Pushing(_) => "pushing",
            EnvConfig::Friction(_) => "friction",
            EnvConfig::Pendulum(_) => "pendulum",
            EnvConfig::Tennis(_) => "tennis",
        }
    }

    /// Returns a copy with the numeric field `parameter` set to `value`.
    /// Integer fields accept only integral values.
    pub fn with_parameter(&self, parameter: &str, value: f64) -> Result<Self> {
        let mut json = serde_json::to_value(self)
            .map_err(|e| Error::Config(format!("cannot encode env config: {e}")))?;
        let fields = json
            .as_object_mut()
            .ok_or_else(|| Error::Config("env config is not an object".into()))?;
        let slot = match fields.get_mut(parameter) {
            Some(slot) if parameter != "name" => slot,
            _ => {
                return Err(Error::Config(format!(
                    "env `{}` has no parameter `{parameter}`",
                    self.name()
                )))
            }
        };
        *slot = if slot.is_u64() {
            if value < 0.0 || value.fract() != 0.0 || value > u32::MAX as f64 {
                return Err(Error::Config(format!(
                    "parameter `{parameter}` needs a nonnegative integer, got {value}"
                )));
            }
            serde_json::Value::from(value as u64)
        } else if slot.is_number() {
            serde_json::Value::from(value)
        } else {
            return Err(Error::Config(format!("parameter `{parameter}` is not a scalar")));
        };
        serde_json::from_value(json).map_err(|e| Error::Config(format!("{parameter}: {e}")))
    }
}

/// Any of the benchmark environments, for selection at runtime.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyEnv<T> {
    Zero(ZeroCostEnv<T>),
    Quadratic(QuadraticEnv<T>),
    Heaviside(HeavisideEnv<T>),
    Coulomb(CoulombEnv<T>),
    BallWall(BallWallEnv<T>),
    Momentum(MomentumTransferEnv<T>),
    Pushing(PushingEnv<T>),
    Friction(FrictionEnv<T>),
    Pendulum(DoublePendulumEnv<T>),
    Tennis(TennisEnv<T>),
}

impl<T: Float> AnyEnv<T> {
    pub fn from_config(config: &EnvConfig) -> Result<Self> {
        use crate::scalar::real;
        Ok(match config {
            EnvConfig::Zero(p) => {
                if p.horizon == 0 {
                    return Err(Error::Config("zero env horizon must be at least 1".into()));
                }
                AnyEnv::Zero(ZeroCostEnv::new(p.state_dim, p.input_dim, p.horizon))
            }
            EnvConfig::Quadratic(p) => AnyEnv::Quadratic(
                QuadraticEnv::new(p.horizon, real(p.q), real(p.r))?.with_initial_state(real(p.x0)),
            ),
            EnvConfig::Heaviside => AnyEnv::Heaviside(HeavisideEnv::new()),
            EnvConfig::Coulomb(p) => AnyEnv::Coulomb(CoulombEnv::new(real(p.nu))?),
            EnvConfig::BallWall(p) => AnyEnv::BallWall(BallWallEnv::new(*p)?),
            EnvConfig::Momentum(p) => AnyEnv::Momentum(MomentumTransferEnv::new(*p)?),
            EnvConfig::Pushing(p) => AnyEnv::Pushing(PushingEnv::new(*p)?),
            EnvConfig::Friction(p) => AnyEnv::Friction(FrictionEnv::new(*p)?),
            EnvConfig::Pendulum(p) => AnyEnv::Pendulum(DoublePendulumEnv::new(p)?),
            EnvConfig::Tennis(p) => AnyEnv::Tennis(TennisEnv::new(p)?),
        })
    }
}

macro_rules! dispatch {
    ($self:ident, $env:ident => $body:expr) => {
        match $self {
            AnyEnv::Zero($env) => $body,
            AnyEnv::Quadratic($env) => $body,
            AnyEnv::Heaviside($env) => $body,
            AnyEnv::Coulomb($env) => $body,
            AnyEnv::BallWall($env) => $body,
            AnyEnv::Momentum($env) => $body,
            AnyEnv::Pushing($env) => $body,
            AnyEnv::Friction($env) => $body,
            AnyEnv::Pendulum($env) => $body,
            AnyEnv::Tennis($env) => $body,
        }
    };
}

impl<T: Float> EnvModel<T> for AnyEnv<T> {
    fn state_dim(&self) -> usize {
        dispatch!(self, e => e.state_dim())
    }
    fn input_dim(&self) -> usize {
        dispatch!(self, e => e.input_dim())
    }
    fn horizon(&self) -> usize {
        dispatch!(self, e => e.horizon())
    }
    fn timestep(&self) -> Option<T> {
        dispatch!(self, e => e.timestep())
    }
    fn smooth_everywhere(&self) -> bool {
        dispatch!(self, e => e.smooth_everywhere())
    }
    fn initial_state(&self) -> Vec<T> {
        dispatch!(self, e => e.initial_state())
    }
    fn step<S: Scalar<T>>(&self, h: usize, x: &[S], u: &[S]) -> Result<Vec<S>> {
        dispatch!(self, e => e.step(h, x, u))
    }
    fn cost<S: Scalar<T>>(&self, h: usize, x: &[S], u: &[S]) -> Result<S> {
        dispatch!(self, e => e.cost(h, x, u))
    }
    fn terminal_cost<S: Scalar<T>>(&self, x: &[S]) -> Result<Option<S>> {
        dispatch!(self, e => e.terminal_cost(x))
    }
    fn on_kink(&self, h: usize, x: &[T], u: &[T]) -> bool {
        dispatch!(self, e => e.on_kink(h, x, u))
    }
    fn divergence_bound(&self) -> T {
        dispatch!(self, e => e.divergence_bound())
    }
    fn default_policy(&self) -> Policy {
        dispatch!(self, e => e.default_policy())
    }
    fn default_theta(&self) -> Vec<T> {
        dispatch!(self, e => e.default_theta())
    }
}
