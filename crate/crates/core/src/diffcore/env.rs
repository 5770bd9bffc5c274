use crate::diffcore::policy::Policy;
use crate::dual::Dual;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::{Float, Scalar};

/// A discrete-time control system `x_{h+1} = φ(x_h, u_h)` with running costs
/// `c_h(x_h, u_h)`.
///
/// Steps are 0-based (`h = 0..horizon`). `step` and `cost` are written once,
/// generically over [`Scalar`], so the same code yields values (over `T`) and
/// exact derivatives (over [`Dual<T>`]). Branches inspect primal values only;
/// at a point lying exactly on a branch boundary the derivative is that of
/// the branch the code takes, which each environment documents.
///
/// The generic methods make this trait unsuitable for `dyn`; use
/// [`AnyEnv`](crate::envs::AnyEnv) for runtime selection.
pub trait EnvModel<T: Float>: Send + Sync {
    fn state_dim(&self) -> usize;
    fn input_dim(&self) -> usize;
    fn horizon(&self) -> usize;

    /// Integrator timestep in seconds, for dynamical systems.
    fn timestep(&self) -> Option<T> {
        None
    }

    /// True only when `φ` and every `c_h` are continuously differentiable everywhere.
    fn smooth_everywhere(&self) -> bool;

    fn initial_state(&self) -> Vec<T>;

    fn step<S: Scalar<T>>(&self, h: usize, x: &[S], u: &[S]) -> Result<Vec<S>>;

    fn cost<S: Scalar<T>>(&self, h: usize, x: &[S], u: &[S]) -> Result<S>;

    /// Cost on the final state `x_{H+1}`. Rollouts fold it into the last
    /// step cost, so a trajectory's total is still the sum of its step costs.
    fn terminal_cost<S: Scalar<T>>(&self, _x: &[S]) -> Result<Option<S>> {
        Ok(None)
    }

    /// Whether `(x, u)` lies on a measure-zero set where the derivative of the
    /// step or cost is undefined and the branch rule was used.
    fn on_kink(&self, _h: usize, _x: &[T], _u: &[T]) -> bool {
        false
    }

    /// States whose magnitude exceeds this are treated as a blown-up integrator.
    fn divergence_bound(&self) -> T {
        T::infinity()
    }

    fn default_policy(&self) -> Policy {
        Policy::open_loop(self.state_dim(), self.input_dim(), self.horizon())
    }

    fn default_theta(&self) -> Vec<T> {
        vec![T::zero(); self.default_policy().param_dim()]
    }

    /// `(∂φ/∂x, ∂φ/∂u)` at `(x, u)`, by forward-mode differentiation of `step`.
    fn step_jacobians(&self, h: usize, x: &[T], u: &[T]) -> Result<(Matrix<T>, Matrix<T>)> {
        let (n, m) = (self.state_dim(), self.input_dim());
        check_dims(n, m, x, u)?;
        let (xs, us) = seed_state_input(x, u);
        let next = self.step(h, &xs, &us)?;
        if next.len() != n {
            return Err(Error::dimension("step output", n, next.len()));
        }
        let mut jx = Matrix::zeros(n, n);
        let mut ju = Matrix::zeros(n, m);
        for (i, xi) in next.iter().enumerate() {
            let g = xi.gradient(n + m);
            for j in 0..n {
                jx[(i, j)] = g[j];
            }
            for j in 0..m {
                ju[(i, j)] = g[n + j];
            }
        }
        Ok((jx, ju))
    }

    /// `(∇_x c_h, ∇_u c_h)` at `(x, u)`.
    fn cost_gradients(&self, h: usize, x: &[T], u: &[T]) -> Result<(Vec<T>, Vec<T>)> {
        let (n, m) = (self.state_dim(), self.input_dim());
        check_dims(n, m, x, u)?;
        let (xs, us) = seed_state_input(x, u);
        let mut g = self.cost(h, &xs, &us)?.gradient(n + m);
        let gu = g.split_off(n);
        Ok((g, gu))
    }
}

fn check_dims<T>(n: usize, m: usize, x: &[T], u: &[T]) -> Result<()> {
    if x.len() != n {
        return Err(Error::dimension("state", n, x.len()));
    }
    if u.len() != m {
        return Err(Error::dimension("input", m, u.len()));
    }
    Ok(())
}

fn seed_state_input<T: Float>(x: &[T], u: &[T]) -> (Vec<Dual<T>>, Vec<Dual<T>>) {
    let dim = x.len() + u.len();
    let xs = x
        .iter()
        .enumerate()
        .map(|(j, &v)| Dual::variable(v, j, dim))
        .collect();
    let us = u
        .iter()
        .enumerate()
        .map(|(j, &v)| Dual::variable(v, x.len() + j, dim))
        .collect();
    (xs, us)
}

/// Central finite-difference Jacobians of `step`, with step
/// `rel·max(1, |coordinate|)`. Shared by the environment tests.
pub fn finite_difference_jacobians<T: Float, E: EnvModel<T>>(
    env: &E,
    h: usize,
    x: &[T],
    u: &[T],
    rel: T,
) -> Result<(Matrix<T>, Matrix<T>)> {
    let (n, m) = (env.state_dim(), env.input_dim());
    let two = T::one() + T::one();
    let mut jx = Matrix::zeros(n, n);
    let mut ju = Matrix::zeros(n, m);
    for j in 0..n + m {
        let (mut xp, mut up) = (x.to_vec(), u.to_vec());
        let (mut xm, mut um) = (x.to_vec(), u.to_vec());
        let base = if j < n { x[j] } else { u[j - n] };
        let eps = rel * base.abs().max(T::one());
        if j < n {
            xp[j] += eps;
            xm[j] -= eps;
        } else {
            up[j - n] += eps;
            um[j - n] -= eps;
        }
        let plus = env.step(h, &xp, &up)?;
        let minus = env.step(h, &xm, &um)?;
        for i in 0..n {
            let d = (plus[i] - minus[i]) / (two * eps);
            if j < n {
                jx[(i, j)] = d;
            } else {
                ju[(i, j - n)] = d;
            }
        }
    }
    Ok((jx, ju))
}

/// Central finite-difference cost gradients, same step rule as
/// [`finite_difference_jacobians`].
pub fn finite_difference_cost_gradients<T: Float, E: EnvModel<T>>(
    env: &E,
    h: usize,
    x: &[T],
    u: &[T],
    rel: T,
) -> Result<(Vec<T>, Vec<T>)> {
    let n = env.state_dim();
    let two = T::one() + T::one();
    let mut g = Vec::with_capacity(n + u.len());
    for j in 0..n + u.len() {
        let (mut xp, mut up) = (x.to_vec(), u.to_vec());
        let (mut xm, mut um) = (x.to_vec(), u.to_vec());
        let base = if j < n { x[j] } else { u[j - n] };
        let eps = rel * base.abs().max(T::one());
        if j < n {
            xp[j] += eps;
            xm[j] -= eps;
        } else {
            up[j - n] += eps;
            um[j - n] -= eps;
        }
        let plus: T = env.cost(h, &xp, &up)?;
        let minus: T = env.cost(h, &xm, &um)?;
        g.push((plus - minus) / (two * eps));
    }
    let gu = g.split_off(n);
    Ok((g, gu))
}
