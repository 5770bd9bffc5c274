//! The four experiment commands. Each turns a validated config into a
//! [`ResultTable`]; a run that hits a diverged rollout still returns the rows
//! it produced, flagged in [`Outcome::diverged`].

use alphagrad::analysis::variance_sweep;
use alphagrad::diffcore::{derive_seed, rollout};
use alphagrad::estimators::{aobg, fobg, zobg, GradientBatch};
use alphagrad::optimize::{evaluate_objective, gradient_descent};
use alphagrad::{EnvModel, Error, NoiseModel};

use crate::config::{Command, ExperimentConfig};
use crate::table::{Cell, ResultTable};
use crate::CliError;

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub table: ResultTable,
    pub diverged: bool,
}

pub fn run(config: &ExperimentConfig) -> Result<Outcome, CliError> {
    match config.command {
        Command::Estimate => run_estimate(config),
        Command::Sweep => run_sweep(config),
        Command::Optimize => run_optimize(config),
        Command::Landscape => run_landscape(config),
    }
}

fn core_error(e: Error) -> CliError {
    if e.is_divergence() {
        CliError::Diverged(e.to_string())
    } else {
        CliError::Config { line: None, message: e.to_string() }
    }
}

fn indexed(prefix: &str, n: usize) -> impl Iterator<Item = String> + '_ {
    (0..n).map(move |j| format!("{prefix}_{j}"))
}

fn reals(xs: &[f64]) -> impl Iterator<Item = Cell> + '_ {
    xs.iter().map(|&x| Cell::Real(x))
}

/// One row per estimator: mean and standard error per component, the
/// per-sample variance, and the interpolation statistics for `aobg`.
pub fn run_estimate(config: &ExperimentConfig) -> Result<Outcome, CliError> {
    let env = config.build_env()?;
    let s = config.resolved();
    let policy = env.default_policy();
    let x1 = env.initial_state();
    let noise = NoiseModel::new(s.sigma, env.input_dim()).map_err(core_error)?;
    let d = s.theta.len();
    let mut columns = vec!["estimator".to_string(), "samples".into()];
    columns.extend(indexed("mean", d));
    columns.extend(indexed("stderr", d));
    columns.extend(["emp_var", "B", "epsilon", "alpha"].map(String::from));
    let mut table = ResultTable::new("estimate", columns);

    let batches = fobg(&env, &policy, &s.theta, &x1, s.samples, &noise, config.seed).and_then(|f| {
        let z = zobg(&env, &policy, &s.theta, &x1, s.samples, &noise, config.seed, s.use_baseline)?;
        Ok((f, z))
    });
    let (f, z) = match batches {
        Ok(b) => b,
        Err(e) if e.is_divergence() => return Ok(Outcome { table, diverged: true }),
        Err(e) => return Err(core_error(e)),
    };
    let nan = f64::NAN;
    let row = |name: &str, b: &GradientBatch<f64>| {
        let mut r = vec![Cell::from(name), Cell::from(b.len())];
        r.extend(reals(&b.mean));
        r.extend(reals(&b.standard_error()));
        r.extend(reals(&[b.emp_var, nan, nan, nan]));
        r
    };
    table.push(row("fobg", &f));
    table.push(row("zobg", &z));

    let (g, dec) = aobg(&f, &z, s.gamma, s.delta, s.r).map_err(core_error)?;
    let a = dec.alpha;
    // The batches are independent, so variances add with squared weights.
    let se: Vec<f64> = f
        .standard_error()
        .iter()
        .zip(z.standard_error())
        .map(|(s1, s0)| (a * a * s1 * s1 + (1.0 - a) * (1.0 - a) * s0 * s0).sqrt())
        .collect();
    let mut r = vec![Cell::from("aobg"), Cell::from(s.samples)];
    r.extend(reals(&g));
    r.extend(reals(&se));
    r.extend(reals(&[
        a * a * f.emp_var + (1.0 - a) * (1.0 - a) * z.emp_var,
        dec.gap,
        dec.epsilon,
        a,
    ]));
    table.push(r);
    Ok(Outcome { table, diverged: false })
}

pub fn run_sweep(config: &ExperimentConfig) -> Result<Outcome, CliError> {
    let sweep = config.sweep.as_ref().expect("validated sweep section");
    let result = variance_sweep::<f64>(&config.env, &sweep.parameter, &sweep.grid, &config.sweep_settings())
        .map_err(core_error)?;
    let columns = ["param", "value", "var_fobg", "var_zobg", "zero_batch_rate", "mean_gap"];
    let mut table = ResultTable::new("sweep", columns.map(String::from).to_vec());
    for rec in &result.records {
        table.push(vec![
            Cell::from(sweep.parameter.as_str()),
            Cell::Real(rec.value),
            Cell::Real(rec.var_fobg),
            Cell::Real(rec.var_zobg),
            Cell::Real(rec.zero_batch_rate),
            Cell::Real(rec.mean_gap),
        ]);
    }
    let diverged = result.records.iter().any(|r| r.diverged);
    Ok(Outcome { table, diverged })
}

/// One row per iteration `t`, describing `θ_t` and the step taken from it.
pub fn run_optimize(config: &ExperimentConfig) -> Result<Outcome, CliError> {
    let env = config.build_env()?;
    let theta0 = config.resolved().theta;
    let run = gradient_descent(&env, &env.default_policy(), &theta0, &config.opt_settings())
        .map_err(core_error)?;
    let mut columns: Vec<String> =
        ["t", "cost", "stderr", "alpha", "sig0sq", "sig1sq", "B", "epsilon"].map(String::from).to_vec();
    columns.extend(indexed("theta", theta0.len()));
    let mut table = ResultTable::new("optimize", columns);
    for (entry, theta) in run.log.iter().zip(&run.iterates) {
        let mut r = vec![Cell::from(entry.t)];
        r.extend(reals(&[
            entry.cost,
            entry.stderr,
            entry.alpha,
            entry.sig0sq,
            entry.sig1sq,
            entry.gap,
            entry.epsilon,
        ]));
        r.extend(reals(theta));
        table.push(r);
    }
    Ok(Outcome { table, diverged: run.diverged })
}

/// Scans one or two components of `θ` on a grid. Per point: the noiseless
/// cost, the smoothed cost with its standard error, and both estimator
/// means. The first axis varies slowest.
pub fn run_landscape(config: &ExperimentConfig) -> Result<Outcome, CliError> {
    let env = config.build_env()?;
    let s = config.resolved();
    let spec = config.landscape.as_ref().expect("validated landscape section");
    let policy = env.default_policy();
    let x1 = env.initial_state();
    let noise = NoiseModel::new(s.sigma, env.input_dim()).map_err(core_error)?;
    let d = s.theta.len();
    let m = config.landscape_eval_samples();

    let mut columns: Vec<String> = spec.axes.iter().map(|a| format!("theta_{}", a.index)).collect();
    columns.extend(["cost", "smoothed", "smoothed_stderr"].map(String::from));
    columns.extend(indexed("fobg", d));
    columns.extend(indexed("zobg", d));
    let mut table = ResultTable::new("landscape", columns);

    let mut points: Vec<Vec<f64>> = vec![vec![]];
    for axis in &spec.axes {
        points = points
            .into_iter()
            .flat_map(|p| {
                axis.values().into_iter().map(move |v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }

    let mut diverged = false;
    for (i, p) in points.iter().enumerate() {
        let mut theta = s.theta.clone();
        for (axis, &v) in spec.axes.iter().zip(p) {
            theta[axis.index] = v;
        }
        let seed = derive_seed(config.seed, "landscape", i as f64);
        let point = (|| -> alphagrad::Result<Vec<f64>> {
            let cost = rollout(&env, &policy, &theta, &x1, &noise.zeros(env.horizon()))?.total_cost;
            let (smoothed, se) = evaluate_objective(&env, &policy, &theta, &x1, m, &noise, config.eval_seed())?;
            let f = fobg(&env, &policy, &theta, &x1, s.samples, &noise, seed)?;
            let z = zobg(&env, &policy, &theta, &x1, s.samples, &noise, seed, s.use_baseline)?;
            let mut v = vec![cost, smoothed, se];
            v.extend(f.mean);
            v.extend(z.mean);
            Ok(v)
        })();
        let values = match point {
            Ok(v) => v,
            Err(e) if e.is_divergence() => {
                diverged = true;
                vec![f64::NAN; 3 + 2 * d]
            }
            Err(e) => return Err(core_error(e)),
        };
        let mut row: Vec<Cell> = reals(p).collect();
        row.extend(reals(&values));
        table.push(row);
    }
    Ok(Outcome { table, diverged })
}
