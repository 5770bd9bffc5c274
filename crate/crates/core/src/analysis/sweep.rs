use serde::{Deserialize, Serialize};

use crate::diffcore::{derive_seed, EnvModel, NoiseModel};
use crate::envs::{AnyEnv, EnvConfig};
use crate::error::{Error, Result};
use crate::estimators::{fobg, zobg, GradientBatch};
use crate::scalar::{distance, real, to_f64, Float};

/// Estimator settings shared by every grid point of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSettings {
    pub samples: usize,
    pub sigma: f64,
    pub seed: u64,
    #[serde(default = "default_true")]
    pub use_baseline: bool,
    /// Policy parameters; the environment's defaults when absent.
    #[serde(default)]
    pub theta: Option<Vec<f64>>,
    /// First-order samples are grouped into consecutive batches of this size
    /// for the zero-batch rate.
    #[serde(default = "default_zero_batch_size")]
    pub zero_batch_size: usize,
}

fn default_true() -> bool {
    true
}

fn default_zero_batch_size() -> usize {
    4
}

/// Statistics at one grid value. Variances are the scalar per-sample
/// variances `E‖g_i − ḡ‖²`. A row whose rollouts diverged keeps its grid value
/// and carries NaN everywhere else.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRecord<T> {
    pub value: f64,
    pub var_fobg: T,
    pub var_zobg: T,
    pub mean_fobg: Vec<T>,
    pub mean_zobg: Vec<T>,
    pub zero_batch_rate: T,
    /// `‖mean_fobg − mean_zobg‖`.
    pub mean_gap: T,
    pub diverged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepResult<T> {
    pub parameter: String,
    pub records: Vec<SweepRecord<T>>,
}

impl<T: Float> SweepResult<T> {
    pub fn grid(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.value).collect()
    }
}

/// Fraction of consecutive, non-overlapping groups of `size` samples whose
/// gradients are all exactly zero. Leftover samples are ignored.
pub fn zero_batch_rate<T: Float>(batch: &GradientBatch<T>, size: usize) -> T {
    let groups = if size == 0 { 0 } else { batch.len() / size };
    if groups == 0 {
        return T::nan();
    }
    let zero = batch
        .per_sample
        .chunks_exact(size)
        .filter(|chunk| chunk.iter().flatten().all(|&g| g == T::zero()))
        .count();
    real::<T>(zero as f64) / real::<T>(groups as f64)
}

/// Runs both estimators at every value of `grid` for `parameter` of the base
/// environment. Grid point `v` uses seed `derive_seed(seed, parameter, v)`,
/// so any row can be reproduced on its own.
pub fn variance_sweep<T: Float>(
    base: &EnvConfig,
    parameter: &str,
    grid: &[f64],
    settings: &SweepSettings,
) -> Result<SweepResult<T>> {
    if grid.is_empty() {
        return Err(Error::Config("sweep grid is empty".into()));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Config("sweep grid must be strictly increasing".into()));
    }
    if settings.zero_batch_size == 0 {
        return Err(Error::Config("zero_batch_size must be positive".into()));
    }
    let noise_sigma = real::<T>(settings.sigma);
    let records = grid
        .iter()
        .map(|&value| {
            let env = AnyEnv::<T>::from_config(&base.with_parameter(parameter, value)?)?;
            let policy = env.default_policy();
            let theta: Vec<T> = match &settings.theta {
                Some(t) => t.iter().map(|&v| real(v)).collect(),
                None => env.default_theta(),
            };
            if theta.len() != policy.param_dim() {
                return Err(Error::dimension("theta", policy.param_dim(), theta.len()));
            }
            let x1 = env.initial_state();
            let noise = NoiseModel::new(noise_sigma, env.input_dim())?;
            let seed = derive_seed(settings.seed, parameter, value);
            let n = settings.samples;
            let first = fobg(&env, &policy, &theta, &x1, n, &noise, seed);
            let zeroth = zobg(&env, &policy, &theta, &x1, n, &noise, seed, settings.use_baseline);
            match (first, zeroth) {
                (Ok(f), Ok(z)) => Ok(SweepRecord {
                    value,
                    var_fobg: f.emp_var,
                    var_zobg: z.emp_var,
                    zero_batch_rate: zero_batch_rate(&f, settings.zero_batch_size),
                    mean_gap: distance(&f.mean, &z.mean),
                    mean_fobg: f.mean,
                    mean_zobg: z.mean,
                    diverged: false,
                }),
                (Err(e), _) | (_, Err(e)) if e.is_divergence() => Ok(SweepRecord {
                    value,
                    var_fobg: T::nan(),
                    var_zobg: T::nan(),
                    mean_fobg: vec![T::nan(); policy.param_dim()],
                    mean_zobg: vec![T::nan(); policy.param_dim()],
                    zero_batch_rate: T::nan(),
                    mean_gap: T::nan(),
                    diverged: true,
                }),
                (Err(e), _) | (_, Err(e)) => Err(e),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    debug_assert!(records.iter().all(|r| r.diverged || to_f64(r.var_fobg) >= 0.0));
    Ok(SweepResult {
        parameter: parameter.to_string(),
        records,
    })
}
