use rayon::prelude::*;

use crate::diffcore::{rollout, EnvModel, NoiseModel, Policy, Stream};
use crate::error::{Error, Result};
use crate::estimators::{EstimatorKind, GradientBatch};
use crate::scalar::Float;

/// Both forms of the score-function estimator evaluated on one set of
/// samples.
#[derive(Clone, Debug, PartialEq)]
pub struct ReinforceForms<T> {
    /// `Σ_h D_θπ(x_h)ᵀ·w_h/σ²·(V_h − b_h)`, weighting each step by its value-to-go.
    pub per_step: GradientBatch<T>,
    /// `(V₁ − b₁)·Σ_h D_θπ(x_h)ᵀ·w_h/σ²`.
    pub total: GradientBatch<T>,
    /// `‖mean(per_step − total)‖`.
    pub discrepancy: T,
    /// Standard error of the mean per-sample difference.
    pub discrepancy_stderr: T,
}

/// Evaluates the per-step and total-return forms of the zeroth-order
/// gradient on the same `N ≥ 1000` samples, drawn from the zeroth-order
/// streams of `seed`. Costs incurred before step `h` do not depend on `w_h`,
/// so both forms have the same expectation; only their variance differs.
///
/// With `use_baseline`, step `h` subtracts the value-to-go of the zero-noise
/// rollout from `h`, and the total form subtracts its full value.
#[allow(clippy::too_many_arguments)]
pub fn reinforce_forms_check<T: Float, E: EnvModel<T>>(
    env: &E,
    policy: &Policy,
    theta: &[T],
    x1: &[T],
    n: usize,
    noise: &NoiseModel<T>,
    seed: u64,
    use_baseline: bool,
) -> Result<ReinforceForms<T>> {
    if n < 1000 {
        return Err(Error::Config(format!("the causality check needs at least 1000 samples, got {n}")));
    }
    let horizon = env.horizon();
    let d = policy.param_dim();
    let baselines: Vec<T> = if use_baseline {
        let nominal = rollout(env, policy, theta, x1, &noise.zeros(horizon))?;
        (1..=horizon).map(|h| nominal.value_to_go(h)).collect::<Result<_>>()?
    } else {
        vec![T::zero(); horizon]
    };
    let samples: Vec<(T, Vec<T>, Vec<T>)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let w = noise.stream(seed, Stream::Zobg, i as u64, horizon);
            let traj = rollout(env, policy, theta, x1, &w).map_err(|e| match e {
                Error::Diverged { step } => Error::SampleDiverged { sample: i, step },
                other => other,
            })?;
            let mut per_step = vec![T::zero(); d];
            let mut score_sum = vec![T::zero(); d];
            let mut score = vec![T::zero(); d];
            for h in 0..horizon {
                score.iter_mut().for_each(|s| *s = T::zero());
                policy.accumulate_jacobian_transpose(h, &traj.states[h], &noise.score(&w[h]), &mut score);
                let advantage = traj.value_to_go(h + 1)? - baselines[h];
                for j in 0..d {
                    per_step[j] += advantage * score[j];
                    score_sum[j] += score[j];
                }
            }
            let advantage = traj.total_cost - baselines[0];
            let total = score_sum.into_iter().map(|s| advantage * s).collect();
            Ok((traj.total_cost, per_step, total))
        })
        .collect::<Result<_>>()?;

    let mut values = Vec::with_capacity(n);
    let mut per_step = Vec::with_capacity(n);
    let mut total = Vec::with_capacity(n);
    let mut diffs = Vec::with_capacity(n);
    for (v, s, t) in samples {
        diffs.push(s.iter().zip(&t).map(|(&a, &b)| a - b).collect::<Vec<T>>());
        values.push(v);
        per_step.push(s);
        total.push(t);
    }
    let diff = GradientBatch::from_samples(EstimatorKind::ZerothOrder, diffs, values.clone(), 0)?;
    let discrepancy = diff.mean.iter().fold(T::zero(), |a, &m| a + m * m).sqrt();
    let discrepancy_stderr = (diff.emp_var / T::from_usize(n).unwrap()).sqrt();
    Ok(ReinforceForms {
        per_step: GradientBatch::from_samples(EstimatorKind::ZerothOrder, per_step, values.clone(), 0)?,
        total: GradientBatch::from_samples(EstimatorKind::ZerothOrder, total, values, 0)?,
        discrepancy,
        discrepancy_stderr,
    })
}
