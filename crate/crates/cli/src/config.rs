//! Experiment configuration files.
//!
//! A config names a command and an environment; everything else falls back
//! to the environment's defaults. Unknown keys are rejected, and every
//! setting is checked before any rollout runs.

use alphagrad::envs::{AnyEnv, EnvConfig};
use alphagrad::optimize::{env_defaults, EstimatorChoice, OptSettings};
use alphagrad::analysis::SweepSettings;
use alphagrad::diffcore::derive_seed;
use alphagrad::EnvModel;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Estimate,
    Sweep,
    Optimize,
    Landscape,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Estimate => "estimate",
            Command::Sweep => "sweep",
            Command::Optimize => "optimize",
            Command::Landscape => "landscape",
        }
    }
}

/// Estimator settings. Missing values come from the environment defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorConfig {
    pub samples: Option<usize>,
    pub sigma: Option<f64>,
    pub gamma: Option<f64>,
    pub delta: Option<f64>,
    /// Overrides the confidence-radius range `R`.
    pub r: Option<f64>,
    #[serde(default = "yes")]
    pub use_baseline: bool,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerConfig {
    #[serde(default = "aobg")]
    pub estimator: EstimatorChoice,
    pub steps: Option<usize>,
    pub lr: Option<f64>,
    pub eval_samples: Option<usize>,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            estimator: EstimatorChoice::Aobg,
            steps: None,
            lr: None,
            eval_samples: None,
        }
    }
}

fn aobg() -> EstimatorChoice {
    EstimatorChoice::Aobg
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub parameter: String,
    pub grid: Vec<f64>,
    #[serde(default = "four")]
    pub zero_batch_size: usize,
}

fn four() -> usize {
    4
}

/// One scanned component of `θ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    #[serde(default)]
    pub index: usize,
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        let span = self.max - self.min;
        let last = (self.points - 1) as f64;
        (0..self.points).map(|i| self.min + span * i as f64 / last).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LandscapeConfig {
    pub axes: Vec<Axis>,
    /// Rollouts behind each smoothed-cost estimate.
    pub eval_samples: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Command,
    pub env: EnvConfig,
    #[serde(default)]
    pub estimator: EstimatorConfig,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    pub sweep: Option<SweepConfig>,
    pub landscape: Option<LandscapeConfig>,
    /// Evaluation point for `estimate`, base point for `sweep` and
    /// `landscape`, and `θ₀` for `optimize`. Defaults to the env's own.
    pub theta: Option<Vec<f64>>,
    #[serde(default)]
    pub seed: u64,
    /// Output directory, relative to the working directory.
    pub out: Option<String>,
}

/// The estimator settings after defaults are filled in.
#[derive(Clone, Debug, PartialEq)]
pub struct Resolved {
    pub samples: usize,
    pub sigma: f64,
    pub gamma: f64,
    pub delta: f64,
    pub r: Option<f64>,
    pub use_baseline: bool,
    pub theta: Vec<f64>,
}

impl ExperimentConfig {
    /// Parses and validates `text`. Errors carry the line of the offending
    /// key where one can be found.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let config: ExperimentConfig = serde_json::from_str(text).map_err(|e| {
            let line = if e.line() > 0 { Some(e.line()) } else { None };
            CliError::Config { line, message: e.to_string() }
        })?;
        config.validate().map_err(|(key, message)| CliError::Config {
            line: key.and_then(|k| locate(text, k)),
            message,
        })?;
        Ok(config)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn build_env(&self) -> Result<AnyEnv<f64>, CliError> {
        AnyEnv::from_config(&self.env).map_err(|e| CliError::Config {
            line: None,
            message: e.to_string(),
        })
    }

    pub fn resolved(&self) -> Resolved {
        let d = env_defaults(&self.env);
        let e = &self.estimator;
        let theta = match &self.theta {
            Some(t) => t.clone(),
            None => AnyEnv::<f64>::from_config(&self.env)
                .map(|env| env.default_theta())
                .unwrap_or_default(),
        };
        Resolved {
            samples: e.samples.unwrap_or(d.samples),
            sigma: e.sigma.unwrap_or(d.sigma),
            gamma: e.gamma.unwrap_or(d.gamma),
            delta: e.delta.unwrap_or(d.delta),
            r: e.r,
            use_baseline: e.use_baseline,
            theta,
        }
    }

    pub fn opt_settings(&self) -> OptSettings {
        let d = env_defaults(&self.env);
        let r = self.resolved();
        OptSettings {
            estimator: self.optimizer.estimator,
            steps: self.optimizer.steps.unwrap_or(d.steps),
            lr: self.optimizer.lr.unwrap_or(d.lr),
            samples: r.samples,
            sigma: r.sigma,
            gamma: r.gamma,
            delta: r.delta,
            r: r.r,
            use_baseline: r.use_baseline,
            seed: self.seed,
            eval_samples: self.optimizer.eval_samples.unwrap_or(d.eval_samples),
            eval_seed: self.eval_seed(),
        }
    }

    pub fn sweep_settings(&self) -> SweepSettings {
        let r = self.resolved();
        SweepSettings {
            samples: r.samples,
            sigma: r.sigma,
            seed: self.seed,
            use_baseline: r.use_baseline,
            theta: self.theta.clone(),
            zero_batch_size: self.sweep.as_ref().map_or(4, |s| s.zero_batch_size),
        }
    }

    pub fn landscape_eval_samples(&self) -> usize {
        self.landscape
            .as_ref()
            .and_then(|l| l.eval_samples)
            .unwrap_or(env_defaults(&self.env).eval_samples)
    }

    pub fn eval_seed(&self) -> u64 {
        derive_seed(self.seed, "evaluation", 0.0)
    }

    fn validate(&self) -> Result<(), (Option<&'static str>, String)> {
        let env = AnyEnv::<f64>::from_config(&self.env).map_err(|e| (Some("env"), e.to_string()))?;
        let r = self.resolved();
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if r.samples < 2 {
            return Err((Some("samples"), "samples must be at least 2".into()));
        }
        if !positive(r.sigma) {
            return Err((Some("sigma"), format!("sigma must be positive, got {}", r.sigma)));
        }
        if !(r.gamma >= 0.0 && r.gamma.is_finite()) {
            return Err((Some("gamma"), format!("gamma must be finite and nonnegative, got {}", r.gamma)));
        }
        if !(r.delta > 0.0 && r.delta < 1.0) {
            return Err((Some("delta"), format!("delta must lie in (0, 1), got {}", r.delta)));
        }
        if matches!(r.r, Some(v) if !(v >= 0.0 && v.is_finite())) {
            return Err((Some("r"), "R must be finite and nonnegative".into()));
        }
        let dim = env.default_policy().param_dim();
        if r.theta.len() != dim {
            return Err((Some("theta"), format!("theta needs {dim} components, got {}", r.theta.len())));
        }
        if r.theta.iter().any(|v| !v.is_finite()) {
            return Err((Some("theta"), "theta must be finite".into()));
        }
        match self.command {
            Command::Estimate => {}
            Command::Optimize => {
                self.opt_settings()
                    .validate()
                    .map_err(|e| (Some("optimizer"), e.to_string()))?;
            }
            Command::Sweep => {
                let s = self
                    .sweep
                    .as_ref()
                    .ok_or((Some("command"), "the sweep command needs a `sweep` section".into()))?;
                if s.grid.is_empty() {
                    return Err((Some("grid"), "sweep grid is empty".into()));
                }
                if s.grid.iter().any(|v| !v.is_finite()) || s.grid.windows(2).any(|w| w[0] >= w[1]) {
                    return Err((Some("grid"), "sweep grid must be finite and strictly increasing".into()));
                }
                if s.zero_batch_size == 0 {
                    return Err((Some("zero_batch_size"), "zero_batch_size must be positive".into()));
                }
                for &v in &s.grid {
                    let swept = self
                        .env
                        .with_parameter(&s.parameter, v)
                        .map_err(|e| (Some("parameter"), e.to_string()))?;
                    AnyEnv::<f64>::from_config(&swept)
                        .map_err(|e| (Some("grid"), format!("{} = {v}: {e}", s.parameter)))?;
                }
            }
            Command::Landscape => {
                let l = self
                    .landscape
                    .as_ref()
                    .ok_or((Some("command"), "the landscape command needs a `landscape` section".into()))?;
                if l.axes.is_empty() || l.axes.len() > 2 {
                    return Err((Some("axes"), "a landscape scans one or two axes".into()));
                }
                for a in &l.axes {
                    if a.index >= dim {
                        return Err((Some("index"), format!("axis index {} out of range 0..{dim}", a.index)));
                    }
                    if a.points < 2 || !(a.min < a.max) || !a.min.is_finite() || !a.max.is_finite() {
                        return Err((Some("axes"), "each axis needs min < max and at least 2 points".into()));
                    }
                }
                if l.axes.len() == 2 && l.axes[0].index == l.axes[1].index {
                    return Err((Some("axes"), "the two axes must scan different components".into()));
                }
                if self.landscape_eval_samples() < 2 {
                    return Err((Some("eval_samples"), "eval_samples must be at least 2".into()));
                }
            }
        }
        Ok(())
    }
}

/// 1-based line of the first occurrence of `"key"` in `text`.
fn locate(text: &str, key: &str) -> Option<usize> {
    let quoted = format!("\"{key}\"");
    text.lines().position(|l| l.contains(&quoted)).map(|i| i + 1)
}
