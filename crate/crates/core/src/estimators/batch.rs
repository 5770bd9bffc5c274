use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diffcore::{
    rollout, rollout_with_branch_gradient, EnvModel, NoiseModel, Policy, Stream,
};
use crate::error::{Error, Result};
use crate::scalar::Float;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    FirstOrder,
    ZerothOrder,
}

/// `N` per-sample gradient estimates with their mean and scalar empirical
/// variance `σ̂² = (1/(N−1))·Σ‖g_i − ḡ‖²`.
#[derive(Clone, Debug, PartialEq)]
pub struct GradientBatch<T> {
    pub kind: EstimatorKind,
    pub per_sample: Vec<Vec<T>>,
    /// `V₁` of each sample's rollout.
    pub values: Vec<T>,
    pub mean: Vec<T>,
    pub emp_var: T,
    /// Samples whose derivative came from an environment's branch rule.
    pub branch_hits: usize,
}

impl<T: Float> GradientBatch<T> {
    /// Builds a batch, summing in ascending sample order. With a single
    /// sample the empirical variance is reported as 0.
    pub fn from_samples(
        kind: EstimatorKind,
        per_sample: Vec<Vec<T>>,
        values: Vec<T>,
        branch_hits: usize,
    ) -> Result<Self> {
        let n = per_sample.len();
        if n == 0 {
            return Err(Error::Config("a gradient batch needs at least one sample".into()));
        }
        if values.len() != n {
            return Err(Error::dimension("batch values", n, values.len()));
        }
        let d = per_sample[0].len();
        if let Some(bad) = per_sample.iter().find(|g| g.len() != d) {
            return Err(Error::dimension("per-sample gradient", d, bad.len()));
        }
        let inv_n = T::one() / T::from_usize(n).unwrap();
        let mut mean = vec![T::zero(); d];
        for g in &per_sample {
            for (m, &gi) in mean.iter_mut().zip(g) {
                *m += gi;
            }
        }
        for m in &mut mean {
            *m = *m * inv_n;
        }
        let all_equal = per_sample.iter().all(|g| g == &per_sample[0]);
        let emp_var = if n < 2 || all_equal {
            T::zero()
        } else {
            let ss = per_sample.iter().fold(T::zero(), |acc, g| {
                acc + g
                    .iter()
                    .zip(&mean)
                    .fold(T::zero(), |a, (&gi, &mi)| a + (gi - mi) * (gi - mi))
            });
            ss / T::from_usize(n - 1).unwrap()
        };
        Ok(Self {
            kind,
            per_sample,
            values,
            mean,
            emp_var,
            branch_hits,
        })
    }

    pub fn len(&self) -> usize {
        self.per_sample.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_sample.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Standard error of each mean component.
    pub fn standard_error(&self) -> Vec<T> {
        let n = self.len();
        if n < 2 {
            return vec![T::zero(); self.dim()];
        }
        let nf = T::from_usize(n).unwrap();
        (0..self.dim())
            .map(|j| {
                let ss = self
                    .per_sample
                    .iter()
                    .fold(T::zero(), |a, g| a + (g[j] - self.mean[j]).powi(2));
                (ss / (nf - T::one()) / nf).sqrt()
            })
            .collect()
    }
}

fn check_noise<T: Float, E: EnvModel<T>>(env: &E, noise: &NoiseModel<T>, n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::Config(format!("batch size must be at least 2, got {n}")));
    }
    if noise.dim() != env.input_dim() {
        return Err(Error::dimension("noise", env.input_dim(), noise.dim()));
    }
    Ok(())
}

fn tag_sample(err: Error, sample: usize) -> Error {
    match err {
        Error::Diverged { step } => Error::SampleDiverged { sample, step },
        other => other,
    }
}

/// First-order batched gradient: the mean of `N` pathwise gradients
/// `∇_θ V₁(x₁, w^i, θ)`, with sample `i` drawing its noise from stream
/// `(seed, Fobg, i)`. Samples run in parallel; the reduction is sequential in
/// sample order, so the result does not depend on the thread count.
///
/// A sample whose path hits a point with an undefined derivative keeps the
/// branch-rule gradient and is counted in `branch_hits`.
pub fn fobg<T: Float, E: EnvModel<T>>(
    env: &E,
    policy: &Policy,
    theta: &[T],
    x1: &[T],
    n: usize,
    noise: &NoiseModel<T>,
    seed: u64,
) -> Result<GradientBatch<T>> {
    check_noise(env, noise, n)?;
    let horizon = env.horizon();
    let samples: Vec<(T, Vec<T>, bool)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let w = noise.stream(seed, Stream::Fobg, i as u64, horizon);
            rollout_with_branch_gradient(env, policy, theta, x1, &w).map_err(|e| tag_sample(e, i))
        })
        .collect::<Result<_>>()?;
    let branch_hits = samples.iter().filter(|s| s.2).count();
    let (values, grads) = samples.into_iter().map(|(v, g, _)| (v, g)).unzip();
    GradientBatch::from_samples(EstimatorKind::FirstOrder, grads, values, branch_hits)
}

/// One zeroth-order sample for the given noise path: returns `V₁` and
/// `(V₁ − baseline)·Σ_h D_θπ(x_h, θ)ᵀ·w_h/σ²`.
pub fn zeroth_order_sample<T: Float, E: EnvModel<T>>(
    env: &E,
    policy: &Policy,
    theta: &[T],
    x1: &[T],
    w: &[Vec<T>],
    baseline: T,
    noise: &NoiseModel<T>,
) -> Result<(T, Vec<T>)> {
    let traj = rollout(env, policy, theta, x1, w)?;
    let mut score = vec![T::zero(); policy.param_dim()];
    for (h, wh) in w.iter().enumerate() {
        policy.accumulate_jacobian_transpose(h, &traj.states[h], &noise.score(wh), &mut score);
    }
    let advantage = traj.total_cost - baseline;
    Ok((traj.total_cost, score.into_iter().map(|s| advantage * s).collect()))
}

/// The zero-noise rollout value used as the zeroth-order baseline.
pub fn baseline_value<T: Float, E: EnvModel<T>>(
    env: &E,
    policy: &Policy,
    theta: &[T],
    x1: &[T],
    noise: &NoiseModel<T>,
) -> Result<T> {
    Ok(rollout(env, policy, theta, x1, &noise.zeros(env.horizon()))?.total_cost)
}

/// Zeroth-order batched gradient with per-sample estimates
/// `(V₁(x₁, w^i, θ) − b)·Σ_h D_θπ(x_h^i, θ)ᵀ·w_h^i/σ²`.
///
/// `b` is the zero-noise rollout value when `use_baseline` is set, else 0.
/// The policy Jacobian is taken along each noisy trajectory. Noise comes from
/// streams `(seed, Zobg, i)`, disjoint from the first-order streams.
#[allow(clippy::too_many_arguments)]
pub fn zobg<T: Float, E: EnvModel<T>>(
    env: &E,
    policy: &Policy,
    theta: &[T],
    x1: &[T],
    n: usize,
    noise: &NoiseModel<T>,
    seed: u64,
    use_baseline: bool,
) -> Result<GradientBatch<T>> {
    check_noise(env, noise, n)?;
    let horizon = env.horizon();
    let baseline = if use_baseline {
        baseline_value(env, policy, theta, x1, noise)?
    } else {
        T::zero()
    };
    let samples: Vec<(T, Vec<T>)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let w = noise.stream(seed, Stream::Zobg, i as u64, horizon);
            zeroth_order_sample(env, policy, theta, x1, &w, baseline, noise)
                .map_err(|e| tag_sample(e, i))
        })
        .collect::<Result<_>>()?;
    let (values, grads) = samples.into_iter().unzip();
    GradientBatch::from_samples(EstimatorKind::ZerothOrder, grads, values, 0)
}
