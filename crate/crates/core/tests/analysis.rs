mod common;

use alphagrad::analysis::{
    fobg_zero_batch_probability, reinforce_forms_check, variance_sweep, zero_batch_rate,
    zobg_variance_bound, BoundInputs, SweepSettings,
};
use alphagrad::envs::{CoulombEnv, EnvConfig, HeavisideEnv, QuadraticEnv};
use alphagrad::estimators::{fobg, zobg};
use alphagrad::{EnvModel, NoiseModel};
use common::sample_variance;

fn settings(samples: usize, sigma: f64, seed: u64) -> SweepSettings {
    serde_json::from_value(serde_json::json!({"samples": samples, "sigma": sigma, "seed": seed})).unwrap()
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

#[test]
fn causal_and_total_forms_agree_on_two_step_quadratic() {
    let env = QuadraticEnv::<f64>::new(2, 1.0, 0.5).unwrap().with_initial_state(0.4);
    let policy = env.default_policy();
    let noise = NoiseModel::new(0.3, 1).unwrap();
    let r = reinforce_forms_check(&env, &policy, &[0.2, -0.1], &[0.4], 100_000, &noise, 2, true).unwrap();
    for j in 0..2 {
        let diffs: Vec<f64> = r
            .per_step
            .per_sample
            .iter()
            .zip(&r.total.per_sample)
            .map(|(a, b)| a[j] - b[j])
            .collect();
        let (m, se) = common::mean_and_stderr(&diffs);
        assert!(m.abs() <= 4.0 * se, "component {j}: {m} vs se {se}");
    }
    // Dropping the costs already paid removes noise from the first-step term.
    assert!(r.per_step.emp_var < r.total.emp_var);
}

#[test]
fn discrepancy_error_shrinks_like_inverse_root_n() {
    let env = QuadraticEnv::<f64>::new(2, 1.0, 0.5).unwrap().with_initial_state(0.4);
    let policy = env.default_policy();
    let noise = NoiseModel::new(0.3, 1).unwrap();
    let theta = [0.2, -0.1];
    let ratios: Vec<f64> = (0..20u64)
        .map(|rep| {
            let small = reinforce_forms_check(&env, &policy, &theta, &[0.4], 1000, &noise, rep, false).unwrap();
            let large = reinforce_forms_check(&env, &policy, &theta, &[0.4], 4000, &noise, 100 + rep, false).unwrap();
            small.discrepancy_stderr / large.discrepancy_stderr
        })
        .collect();
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    assert!((2.0 / 1.5..=2.0 * 1.5).contains(&mean), "mean ratio {mean}");
}

#[test]
fn coulomb_zero_batches_match_the_closed_form() {
    let env = CoulombEnv::<f64>::new(0.1).unwrap();
    let policy = env.default_policy();
    let noise = NoiseModel::new(1.0, 1).unwrap();
    let batches = 10_000;
    let big = fobg(&env, &policy, &[0.0], &env.initial_state(), 4 * batches, &noise, 21).unwrap();
    let observed = zero_batch_rate(&big, 4);
    let p = fobg_zero_batch_probability(0.0, 0.1, 1.0, 4).unwrap();
    let sd = (p * (1.0 - p) / batches as f64).sqrt();
    assert!((observed - p).abs() <= 4.0 * sd, "{observed} vs {p} ± {sd}");
}

#[test]
fn zeroth_order_variance_respects_the_bound() {
    let env = HeavisideEnv::<f64>::new();
    let policy = env.default_policy();
    for sigma in [0.3, 1.0, 2.5] {
        let noise = NoiseModel::new(sigma, 1).unwrap();
        for theta in [-0.5, 0.0, 0.7] {
            let b = zobg(&env, &policy, &[theta], &env.initial_state(), 100_000, &noise, 3, false).unwrap();
            let samples: Vec<f64> = b.per_sample.iter().map(|g| g[0]).collect();
            let bound = zobg_variance_bound(
                BoundInputs { value_bound: 1.0, policy_bound: 1.0 },
                1,
                1,
                sigma,
                1,
            )
            .unwrap();
            assert!(sample_variance(&samples) <= bound, "σ {sigma}, θ {theta}");
        }
    }
}

#[test]
fn stiffer_contact_raises_first_order_variance() {
    let base: EnvConfig = serde_json::from_str(r#"{"name": "pushing"}"#).unwrap();
    let grid = [10.0, 100.0, 1000.0, 10000.0];
    let r = variance_sweep::<f64>(&base, "stiffness", &grid, &settings(1000, 1.0, 0)).unwrap();
    assert_eq!(r.grid(), grid);
    let first: Vec<f64> = r.records.iter().map(|x| x.var_fobg).collect();
    let zeroth: Vec<f64> = r.records.iter().map(|x| x.var_zobg).collect();
    assert!(first.windows(2).all(|w| w[0] <= w[1]), "{first:?}");
    assert!(first[0] < zeroth[0]);
    assert!(first[3] > zeroth[3]);
    assert!(zeroth.iter().all(|&z| z < 10.0 * zeroth[0] && z > 0.1 * zeroth[0]));
}

#[test]
fn longer_pendulum_horizons_favour_zeroth_order() {
    let base: EnvConfig = serde_json::from_str(r#"{"name": "pendulum"}"#).unwrap();
    let r = variance_sweep::<f64>(&base, "steps", &[100.0, 300.0, 1000.0], &settings(1000, 0.01, 0)).unwrap();
    let ratio: Vec<f64> = r.records.iter().map(|x| x.var_fobg / x.var_zobg).collect();
    assert!(ratio.windows(2).all(|w| w[0] < w[1]), "{ratio:?}");
}

#[test]
fn coulomb_first_order_variance_scales_inversely_with_tolerance() {
    let base: EnvConfig = serde_json::from_str(r#"{"name": "coulomb"}"#).unwrap();
    let grid = [1e-3, 1e-2, 1e-1, 1.0];
    let r = variance_sweep::<f64>(&base, "nu", &grid, &settings(100_000, 1.0, 0)).unwrap();
    let lx: Vec<f64> = grid.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = r.records.iter().map(|x| x.var_fobg.ln()).collect();
    let s = slope(&lx, &ly);
    assert!((-1.3..=-0.7).contains(&s), "slope {s}");
}
