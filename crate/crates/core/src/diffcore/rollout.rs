use crate::diffcore::env::EnvModel;
use crate::diffcore::policy::Policy;
use crate::dual::Dual;
use crate::error::{Error, Result};
use crate::scalar::{to_f64, Float, Scalar};

/// One simulated path. `states` has `H + 1` entries, the other per-step
/// vectors `H`.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<T> {
    pub states: Vec<Vec<T>>,
    pub inputs: Vec<Vec<T>>,
    pub noises: Vec<Vec<T>>,
    pub step_costs: Vec<T>,
    pub total_cost: T,
}

impl<T: Float> Trajectory<T> {
    pub fn horizon(&self) -> usize {
        self.step_costs.len()
    }

    /// `V_h = Σ_{h' ≥ h} c_{h'}` with 1-based `h`, so `value_to_go(1)` is the
    /// total cost. Summed front to back so that `h = 1` reproduces
    /// `total_cost` bit for bit.
    pub fn value_to_go(&self, h: usize) -> Result<T> {
        let len = self.horizon();
        if h == 0 || h > len {
            return Err(Error::Index { index: h, len });
        }
        Ok(self.step_costs[h - 1..]
            .iter()
            .fold(T::zero(), |acc, &c| acc + c))
    }
}

struct Simulation<S> {
    states: Vec<Vec<S>>,
    inputs: Vec<S>,
    step_costs: Vec<S>,
    total: S,
    kink: Option<usize>,
}

fn check_inputs<T: Float, E: EnvModel<T>>(
    env: &E,
    policy: &Policy,
    theta_len: usize,
    x1: &[T],
    noises: &[Vec<T>],
) -> Result<()> {
    let (n, m, horizon) = (env.state_dim(), env.input_dim(), env.horizon());
    if policy.state_dim() != n {
        return Err(Error::dimension("policy state dimension", n, policy.state_dim()));
    }
    if policy.input_dim() != m {
        return Err(Error::dimension("policy input dimension", m, policy.input_dim()));
    }
    if policy.horizon() != horizon {
        return Err(Error::dimension("policy horizon", horizon, policy.horizon()));
    }
    if theta_len != policy.param_dim() {
        return Err(Error::dimension("theta", policy.param_dim(), theta_len));
    }
    if x1.len() != n {
        return Err(Error::dimension("initial state", n, x1.len()));
    }
    if noises.len() != horizon {
        return Err(Error::dimension("noise horizon", horizon, noises.len()));
    }
    if let Some(w) = noises.iter().find(|w| w.len() != m) {
        return Err(Error::dimension("noise", m, w.len()));
    }
    Ok(())
}

/// Shared by the plain and the differentiated rollout so both perform the
/// same primal arithmetic in the same order.
fn simulate<T, S, E>(
    env: &E,
    policy: &Policy,
    theta: &[S],
    x1: &[T],
    noises: &[Vec<T>],
    detect_kinks: bool,
) -> Result<Simulation<S>>
where
    T: Float,
    S: Scalar<T>,
    E: EnvModel<T>,
{
    check_inputs(env, policy, theta.len(), x1, noises)?;
    let horizon = env.horizon();
    let bound = env.divergence_bound();
    let mut x: Vec<S> = x1.iter().map(|&v| S::constant(v)).collect();
    let mut states = Vec::with_capacity(horizon + 1);
    let mut inputs = Vec::with_capacity(horizon * env.input_dim());
    let mut step_costs = Vec::with_capacity(horizon);
    let mut total = S::zero();
    let mut kink = None;

    for (h, w) in noises.iter().enumerate() {
        let u: Vec<S> = policy
            .eval(h, &x, theta)?
            .into_iter()
            .zip(w)
            .map(|(ui, &wi)| ui + wi)
            .collect();
        if detect_kinks && kink.is_none() {
            let xv: Vec<T> = x.iter().map(Scalar::value).collect();
            let uv: Vec<T> = u.iter().map(Scalar::value).collect();
            if env.on_kink(h, &xv, &uv) {
                kink = Some(h + 1);
            }
        }
        let mut c = env.cost(h, &x, &u)?;
        let next = env.step(h, &x, &u)?;
        if next.len() != x.len() {
            return Err(Error::dimension("step output", x.len(), next.len()));
        }
        if h + 1 == horizon {
            if let Some(terminal) = env.terminal_cost(&next)? {
                c = c + terminal;
            }
        }
        let blown = |s: &S| !s.value().is_finite() || s.value().abs() > bound;
        if !c.value().is_finite() || next.iter().any(blown) {
            return Err(Error::Diverged { step: h + 1 });
        }
        total = total + c.clone();
        step_costs.push(c);
        inputs.extend(u);
        states.push(std::mem::replace(&mut x, next));
    }
    states.push(x);
    Ok(Simulation {
        states,
        inputs,
        step_costs,
        total,
        kink,
    })
}

/// Simulates `x_{h+1} = φ(x_h, π_h(x_h, θ) + w_h)` and records every cost.
///
/// Errors: dimension mismatches, and [`Error::Diverged`] with the 1-based
/// step whose output was non-finite or beyond the environment's bound.
pub fn rollout<T: Float, E: EnvModel<T>>(
    env: &E,
    policy: &Policy,
    theta: &[T],
    x1: &[T],
    noises: &[Vec<T>],
) -> Result<Trajectory<T>> {
    let sim = simulate::<T, T, E>(env, policy, theta, x1, noises, false)?;
    let m = env.input_dim();
    Ok(Trajectory {
        states: sim.states,
        inputs: sim.inputs.chunks(m.max(1)).map(<[T]>::to_vec).collect(),
        noises: noises.to_vec(),
        step_costs: sim.step_costs,
        total_cost: sim.total,
    })
}

/// `V₁` and its pathwise derivative `∇_θ V₁`, holding `x₁` and the noises fixed.
///
/// If the path touches a point where the environment reports an undefined
/// derivative, the branch-rule result is returned inside
/// [`Error::UndefinedGradient`] so the caller can decide what to do with it.
pub fn rollout_with_gradient<T: Float, E: EnvModel<T>>(
    env: &E,
    policy: &Policy,
    theta: &[T],
    x1: &[T],
    noises: &[Vec<T>],
) -> Result<(T, Vec<T>)> {
    let seeded = Dual::variables(theta);
    let sim = simulate::<T, Dual<T>, E>(env, policy, &seeded, x1, noises, true)?;
    let value = sim.total.re();
    let grad = sim.total.gradient(theta.len());
    match sim.kink {
        None => Ok((value, grad)),
        Some(step) => Err(Error::UndefinedGradient {
            step,
            value: to_f64(value),
            gradient: grad.into_iter().map(to_f64).collect(),
        }),
    }
}

/// Like [`rollout_with_gradient`] but resolves undefined derivatives by the
/// branch rule. The flag reports whether that happened.
pub fn rollout_with_branch_gradient<T: Float, E: EnvModel<T>>(
    env: &E,
    policy: &Policy,
    theta: &[T],
    x1: &[T],
    noises: &[Vec<T>],
) -> Result<(T, Vec<T>, bool)> {
    let seeded = Dual::variables(theta);
    let sim = simulate::<T, Dual<T>, E>(env, policy, &seeded, x1, noises, true)?;
    Ok((
        sim.total.re(),
        sim.total.gradient(theta.len()),
        sim.kink.is_some(),
    ))
}
