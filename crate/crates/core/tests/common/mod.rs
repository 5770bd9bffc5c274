#![allow(dead_code)]

use alphagrad::diffcore::{rollout, Stream};
use alphagrad::{EnvModel, NoiseModel, Policy};
use rayon::prelude::*;

/// Central difference of the smoothed objective along `dir`, with the `+`
/// and `−` rollouts sharing their noise. Returns the mean and standard error
/// of the per-sample differences.
#[allow(clippy::too_many_arguments)]
pub fn directional_difference<E: EnvModel<f64>>(
    env: &E,
    policy: &Policy,
    theta: &[f64],
    x1: &[f64],
    noise: &NoiseModel<f64>,
    dir: &[f64],
    step: f64,
    n: usize,
    seed: u64,
) -> (f64, f64) {
    let plus: Vec<f64> = theta.iter().zip(dir).map(|(t, d)| t + step * d).collect();
    let minus: Vec<f64> = theta.iter().zip(dir).map(|(t, d)| t - step * d).collect();
    let diffs: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let w = noise.stream(seed, Stream::Custom(17), i as u64, env.horizon());
            let fp = rollout(env, policy, &plus, x1, &w).unwrap().total_cost;
            let fm = rollout(env, policy, &minus, x1, &w).unwrap().total_cost;
            (fp - fm) / (2.0 * step)
        })
        .collect();
    mean_and_stderr(&diffs)
}

pub fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

pub fn sample_variance(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
}

/// Projection of every per-sample gradient on `dir`: mean and standard error.
pub fn projected(per_sample: &[Vec<f64>], dir: &[f64]) -> (f64, f64) {
    let p: Vec<f64> = per_sample
        .iter()
        .map(|g| g.iter().zip(dir).map(|(a, b)| a * b).sum())
        .collect();
    mean_and_stderr(&p)
}

/// A fixed unit vector in `R^d` that weights every component.
pub fn probe_direction(d: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..d).map(|j| 1.0 + 0.37 * ((j * 7 % 5) as f64)).collect();
    let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
    raw.into_iter().map(|x| x / norm).collect()
}
