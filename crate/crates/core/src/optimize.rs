//! Fixed-step gradient descent driven by one of the three estimators.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diffcore::{derive_seed, rollout, EnvModel, NoiseModel, Policy, Stream};
use crate::envs::EnvConfig;
use crate::error::{Error, Result};
use crate::estimators::{aobg, fobg, zobg, AlphaDecision};
use crate::scalar::{norm, real, Float};

/// Gradient norms above this are scaled down to it before the step.
pub const CLIP_NORM: f64 = 1e6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorChoice {
    Fobg,
    Zobg,
    Aobg,
}

impl EstimatorChoice {
    pub fn name(self) -> &'static str {
        match self {
            EstimatorChoice::Fobg => "fobg",
            EstimatorChoice::Zobg => "zobg",
            EstimatorChoice::Aobg => "aobg",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptSettings {
    pub estimator: EstimatorChoice,
    /// Number of iterations `T`.
    pub steps: usize,
    /// Learning rate `η`.
    pub lr: f64,
    /// Samples per gradient estimate.
    pub samples: usize,
    pub sigma: f64,
    pub gamma: f64,
    pub delta: f64,
    /// Overrides the default `R` of the confidence radius.
    #[serde(default)]
    pub r: Option<f64>,
    #[serde(default = "default_true")]
    pub use_baseline: bool,
    pub seed: u64,
    /// Rollouts per objective evaluation.
    pub eval_samples: usize,
    /// Seed of the evaluation noise, shared by all estimators so cost curves
    /// are comparable.
    pub eval_seed: u64,
}

fn default_true() -> bool {
    true
}

impl OptSettings {
    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::Config("at least one iteration is required".into()));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::Config(format!("learning rate must be positive, got {}", self.lr)));
        }
        if self.samples < 2 || self.eval_samples < 2 {
            return Err(Error::Config("sample counts must be at least 2".into()));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::Config(format!("sigma must be positive, got {}", self.sigma)));
        }
        if self.estimator == EstimatorChoice::Aobg {
            if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
                return Err(Error::Config("gamma must be finite and nonnegative".into()));
            }
            if !(self.delta > 0.0 && self.delta < 1.0) {
                return Err(Error::Config("delta must lie in (0, 1)".into()));
            }
            if matches!(self.r, Some(r) if !(r >= 0.0 && r.is_finite())) {
                return Err(Error::Config("R must be finite and nonnegative".into()));
            }
        }
        Ok(())
    }
}

/// Per-environment defaults for descent runs. The learning rates are the
/// ones the case studies use; `sigma`, `samples` and `gamma` for the two
/// landscape envs were chosen so that the three estimators show their
/// characteristic behaviour within `steps` iterations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EnvDefaults {
    pub lr: f64,
    pub sigma: f64,
    pub samples: usize,
    pub gamma: f64,
    pub delta: f64,
    pub steps: usize,
    pub eval_samples: usize,
}

pub fn env_defaults(config: &EnvConfig) -> EnvDefaults {
    let base = EnvDefaults {
        lr: 0.1,
        sigma: 0.1,
        samples: 100,
        gamma: 10.0,
        delta: 0.05,
        steps: 50,
        eval_samples: 1000,
    };
    match config {
        EnvConfig::Zero(_) => base,
        EnvConfig::Quadratic(_) => EnvDefaults { lr: 0.25, ..base },
        EnvConfig::Heaviside | EnvConfig::Coulomb(_) => EnvDefaults {
            sigma: 1.0,
            samples: 1000,
            ..base
        },
        EnvConfig::BallWall(_) => EnvDefaults {
            lr: 0.02,
            sigma: 0.15,
            gamma: 80.0,
            steps: 60,
            ..base
        },
        EnvConfig::Momentum(_) => EnvDefaults {
            lr: 0.02,
            sigma: 0.15,
            gamma: 160.0,
            steps: 60,
            ..base
        },
        EnvConfig::Pushing(_) => EnvDefaults {
            lr: 1e-3,
            sigma: 1.0,
            ..base
        },
        EnvConfig::Friction(_) => EnvDefaults { lr: 1e-2, ..base },
        EnvConfig::Pendulum(_) => EnvDefaults {
            lr: 1e-3,
            sigma: 0.01,
            ..base
        },
        EnvConfig::Tennis(_) => EnvDefaults { lr: 1e-3, ..base },
    }
}

impl OptSettings {
    /// Settings for `estimator` on `config` built from [`env_defaults`].
    pub fn for_env(config: &EnvConfig, estimator: EstimatorChoice, seed: u64) -> Self {
        let d = env_defaults(config);
        Self {
            estimator,
            steps: d.steps,
            lr: d.lr,
            samples: d.samples,
            sigma: d.sigma,
            gamma: d.gamma,
            delta: d.delta,
            r: None,
            use_baseline: true,
            seed,
            eval_samples: d.eval_samples,
            eval_seed: derive_seed(seed, "evaluation", 0.0),
        }
    }
}

/// Statistics logged at iteration `t`, measured at `θ_t`. Fields that the
/// chosen estimator does not produce are NaN.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IterationLog<T> {
    pub t: usize,
    pub cost: T,
    pub stderr: T,
    pub alpha: T,
    pub sig0sq: T,
    pub sig1sq: T,
    pub gap: T,
    pub epsilon: T,
    pub clipped: bool,
    pub decision: Option<AlphaDecision<T>>,
}

/// A full descent run. `iterates` holds `θ_0, …, θ_T` (fewer if the run
/// diverged) and `log[t]` the statistics at `θ_t`; `final_cost` is the
/// evaluated cost of the last iterate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OptRun<T> {
    pub settings: OptSettings,
    pub iterates: Vec<Vec<T>>,
    pub log: Vec<IterationLog<T>>,
    pub final_cost: T,
    pub final_stderr: T,
    pub diverged: bool,
}

impl<T: Float> OptRun<T> {
    pub fn costs(&self) -> Vec<T> {
        self.log.iter().map(|l| l.cost).collect()
    }

    pub fn alphas(&self) -> Vec<T> {
        self.log.iter().map(|l| l.alpha).collect()
    }

    pub fn final_theta(&self) -> &[T] {
        self.iterates.last().map(Vec::as_slice).unwrap_or(&[])
    }
}

/// Monte-Carlo estimate of `F(θ)` from `M` rollouts with noise from streams
/// `(eval_seed, Eval, i)`: returns the sample mean and its standard error.
pub fn evaluate_objective<T: Float, E: EnvModel<T>>(
    env: &E,
    policy: &Policy,
    theta: &[T],
    x1: &[T],
    m: usize,
    noise: &NoiseModel<T>,
    eval_seed: u64,
) -> Result<(T, T)> {
    if m < 2 {
        return Err(Error::Config(format!("evaluation needs at least 2 rollouts, got {m}")));
    }
    let horizon = env.horizon();
    let values: Vec<T> = (0..m)
        .into_par_iter()
        .map(|i| {
            let w = noise.stream(eval_seed, Stream::Eval, i as u64, horizon);
            rollout(env, policy, theta, x1, &w)
                .map(|traj| traj.total_cost)
                .map_err(|e| match e {
                    Error::Diverged { step } => Error::SampleDiverged { sample: i, step },
                    other => other,
                })
        })
        .collect::<Result<_>>()?;
    let mf = T::from_usize(m).unwrap();
    let mean = values.iter().fold(T::zero(), |a, &v| a + v) / mf;
    let ss = values.iter().fold(T::zero(), |a, &v| a + (v - mean) * (v - mean));
    Ok((mean, (ss / (mf - T::one()) / mf).sqrt()))
}

/// Runs `θ_{t+1} = θ_t − η·ĝ_t` for `T` iterations from `theta0`.
///
/// Iteration `t` draws its estimator noise with seed
/// `derive_seed(seed, "iteration", t)`; the cost is always evaluated with the
/// same `eval_seed` streams. A gradient longer than [`CLIP_NORM`] is rescaled
/// and the iteration is marked `clipped`. If a rollout diverges the run stops
/// and is returned with `diverged` set and the history so far.
pub fn gradient_descent<T: Float, E: EnvModel<T>>(
    env: &E,
    policy: &Policy,
    theta0: &[T],
    settings: &OptSettings,
) -> Result<OptRun<T>> {
    settings.validate()?;
    if theta0.len() != policy.param_dim() {
        return Err(Error::dimension("theta", policy.param_dim(), theta0.len()));
    }
    let x1 = env.initial_state();
    let noise = NoiseModel::new(real::<T>(settings.sigma), env.input_dim())?;
    let nan = T::nan();
    let mut run = OptRun {
        settings: settings.clone(),
        iterates: vec![theta0.to_vec()],
        log: Vec::with_capacity(settings.steps),
        final_cost: nan,
        final_stderr: nan,
        diverged: false,
    };
    let mut theta = theta0.to_vec();
    for t in 0..settings.steps {
        let step = iteration(env, policy, &theta, &x1, &noise, settings, t);
        let (gradient, mut entry) = match step {
            Ok(s) => s,
            Err(e) if e.is_divergence() => {
                run.diverged = true;
                return Ok(run);
            }
            Err(e) => return Err(e),
        };
        let length = norm(&gradient);
        let clip = real::<T>(CLIP_NORM);
        let scale = if length > clip {
            entry.clipped = true;
            clip / length
        } else {
            T::one()
        };
        let lr = real::<T>(settings.lr);
        for (th, g) in theta.iter_mut().zip(&gradient) {
            *th -= lr * scale * *g;
        }
        run.log.push(entry);
        run.iterates.push(theta.clone());
    }
    match evaluate_objective(env, policy, &theta, &x1, settings.eval_samples, &noise, settings.eval_seed) {
        Ok((c, s)) => {
            run.final_cost = c;
            run.final_stderr = s;
        }
        Err(e) if e.is_divergence() => run.diverged = true,
        Err(e) => return Err(e),
    }
    Ok(run)
}

fn iteration<T: Float, E: EnvModel<T>>(
    env: &E,
    policy: &Policy,
    theta: &[T],
    x1: &[T],
    noise: &NoiseModel<T>,
    settings: &OptSettings,
    t: usize,
) -> Result<(Vec<T>, IterationLog<T>)> {
    let (cost, stderr) =
        evaluate_objective(env, policy, theta, x1, settings.eval_samples, noise, settings.eval_seed)?;
    let seed = derive_seed(settings.seed, "iteration", t as f64);
    let n = settings.samples;
    let nan = T::nan();
    let mut entry = IterationLog {
        t,
        cost,
        stderr,
        alpha: nan,
        sig0sq: nan,
        sig1sq: nan,
        gap: nan,
        epsilon: nan,
        clipped: false,
        decision: None,
    };
    let gradient = match settings.estimator {
        EstimatorChoice::Fobg => {
            let b = fobg(env, policy, theta, x1, n, noise, seed)?;
            entry.alpha = T::one();
            entry.sig1sq = b.emp_var;
            b.mean
        }
        EstimatorChoice::Zobg => {
            let b = zobg(env, policy, theta, x1, n, noise, seed, settings.use_baseline)?;
            entry.alpha = T::zero();
            entry.sig0sq = b.emp_var;
            b.mean
        }
        EstimatorChoice::Aobg => {
            let first = fobg(env, policy, theta, x1, n, noise, seed)?;
            let zeroth = zobg(env, policy, theta, x1, n, noise, seed, settings.use_baseline)?;
            let (g, d) = aobg(
                &first,
                &zeroth,
                real(settings.gamma),
                real(settings.delta),
                settings.r.map(real),
            )?;
            entry.alpha = d.alpha;
            entry.sig0sq = d.sig0sq;
            entry.sig1sq = d.sig1sq;
            entry.gap = d.gap;
            entry.epsilon = d.epsilon;
            entry.decision = Some(d);
            g
        }
    };
    Ok((gradient, entry))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::{HeavisideEnv, QuadraticEnv, ZeroCostEnv};

    fn settings(estimator: EstimatorChoice) -> OptSettings {
        OptSettings {
            estimator,
            steps: 10,
            lr: 0.25,
            samples: 4,
            sigma: 0.1,
            gamma: 1.0,
            delta: 0.05,
            r: None,
            use_baseline: true,
            seed: 3,
            eval_samples: 100,
            eval_seed: 99,
        }
    }

    #[test]
    fn quadratic_contracts_geometrically() {
        let env = QuadraticEnv::<f64>::new(1, 0.0, 1.0).unwrap();
        let run = gradient_descent(&env, &env.default_policy(), &[1.0], &settings(EstimatorChoice::Fobg)).unwrap();
        assert_eq!(run.log.len(), 10);
        assert_eq!(run.iterates.len(), 11);
        assert!(run.final_theta()[0].abs() < 0.1);
        // the noise-free map θ ↦ (1 − 2η)θ halves the iterate each step; the
        // batch mean of the noise enters with weight 2η and σ/√N = 0.05
        for (t, th) in run.iterates.iter().enumerate() {
            assert!((th[0] - 0.5f64.powi(t as i32)).abs() < 0.2, "t={t}");
        }
        assert!(run.log.iter().all(|l| l.alpha == 1.0 && l.sig0sq.is_nan()));
    }

    #[test]
    fn runs_are_reproducible() {
        let env = QuadraticEnv::<f64>::new(2, 0.3, 1.0).unwrap();
        let policy = env.default_policy();
        for est in [EstimatorChoice::Fobg, EstimatorChoice::Zobg, EstimatorChoice::Aobg] {
            let a = gradient_descent(&env, &policy, &[0.5, -0.5], &settings(est)).unwrap();
            let b = gradient_descent(&env, &policy, &[0.5, -0.5], &settings(est)).unwrap();
            assert_eq!(format!("{a:?}"), format!("{b:?}"));
        }
    }

    #[test]
    fn zero_cost_evaluates_to_zero() {
        let env = ZeroCostEnv::<f64>::new(2, 1, 3);
        let noise = NoiseModel::new(1.0, 1).unwrap();
        let r = evaluate_objective(&env, &env.default_policy(), &[0.0; 3], &[0.0; 2], 10, &noise, 1).unwrap();
        assert_eq!(r, (0.0, 0.0));
    }

    #[test]
    fn heaviside_smoothed_value() {
        let env = HeavisideEnv::<f64>::new();
        let noise = NoiseModel::new(1.0, 1).unwrap();
        let (mean, se) = evaluate_objective(&env, &env.default_policy(), &[0.0], &[0.0], 1_000_000, &noise, 7).unwrap();
        assert!((mean - 0.5).abs() <= 3.0 * se, "{mean} ± {se}");
    }

    #[test]
    fn stderr_follows_the_clt_rate() {
        let env = QuadraticEnv::<f64>::new(1, 0.0, 1.0).unwrap();
        let policy = env.default_policy();
        let noise = NoiseModel::new(1.0, 1).unwrap();
        let se: Vec<f64> = [1_000, 10_000, 100_000]
            .iter()
            .map(|&m| evaluate_objective(&env, &policy, &[0.3], &[0.0], m, &noise, 5).unwrap().1)
            .collect();
        for w in se.windows(2) {
            let ratio = w[0] / w[1] / 10f64.sqrt();
            assert!((1.0 / 1.3..=1.3).contains(&ratio), "{ratio}");
        }
    }

    #[test]
    fn validation() {
        let env = QuadraticEnv::<f64>::new(1, 0.0, 1.0).unwrap();
        let policy = env.default_policy();
        let mut s = settings(EstimatorChoice::Fobg);
        s.steps = 0;
        assert!(gradient_descent(&env, &policy, &[1.0], &s).is_err());
        let mut s = settings(EstimatorChoice::Fobg);
        s.lr = 0.0;
        assert!(gradient_descent(&env, &policy, &[1.0], &s).is_err());
        assert!(gradient_descent(&env, &policy, &[1.0, 2.0], &settings(EstimatorChoice::Fobg)).is_err());
    }
}
