//! Planar ball bouncing off a controlled, tiltable paddle.
//!
//! Impacts are resolved by continuous event detection: within each step the
//! exact time at which the ball's signed distance to the paddle line reaches
//! zero is found, the relative normal velocity is reflected, and the flight
//! continues for the rest of the step. Because the impact time is itself
//! differentiated (implicit-function rule on `gap(τ) = 0`), the derivative
//! of the step accounts for impacts happening earlier or later.

use serde::{Deserialize, Serialize};

use crate::diffcore::{EnvModel, Policy};
use crate::error::{Error, Result};
use crate::scalar::{real, Float, Scalar};

/// Impacts allowed within one step before the step is rejected.
pub const MAX_IMPACTS: usize = 4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TennisParams {
    pub restitution: f64,
    pub gravity: f64,
    pub dt: f64,
    pub horizon: usize,
    pub target: [f64; 2],
    pub paddle_half_length: f64,
    pub control_weight: f64,
    /// `[x, y, vx, vy]` of the ball at the start.
    pub ball_start: [f64; 4],
    /// Paddle centre at the start.
    pub paddle_start: [f64; 2],
}

impl Default for TennisParams {
    fn default() -> Self {
        Self {
            restitution: 0.9,
            gravity: 9.81,
            dt: 0.01,
            horizon: 200,
            target: [3.0, 0.0],
            paddle_half_length: 0.3,
            control_weight: 1e-4,
            ball_start: [0.0, 1.5, 1.0, 0.0],
            paddle_start: [0.5, 0.0],
        }
    }
}

/// State `[ball_x, ball_y, ball_vx, ball_vy, paddle_x, paddle_y]`; inputs
/// `[paddle_vx, paddle_vy, paddle_tilt]`. The paddle is a segment through its
/// centre with normal `(−sin φ, cos φ)`; the ball bounces only off its upper
/// side. Linear feedback over `[state; 1]` gives 21 parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct TennisEnv<T> {
    restitution: T,
    gravity: T,
    dt: T,
    horizon: usize,
    target: [T; 2],
    half_length: T,
    control_weight: T,
    start: [T; 6],
}

/// Gap polynomial `c + b·τ + a·τ²` and the tangential offset at `τ`.
struct Flight<S> {
    a: S,
    b: S,
    c: S,
}

impl<T: Float> TennisEnv<T> {
    pub fn new(p: &TennisParams) -> Result<Self> {
        if !(p.restitution > 0.0 && p.restitution <= 1.0) {
            return Err(Error::Domain(format!(
                "restitution must lie in (0, 1], got {}",
                p.restitution
            )));
        }
        let positive = [p.dt, p.paddle_half_length]
            .iter()
            .all(|&v| v > 0.0 && v.is_finite());
        if !positive || p.horizon == 0 || !(p.gravity >= 0.0) || !(p.control_weight >= 0.0) {
            return Err(Error::Domain("tennis parameters out of range".into()));
        }
        let [bx, by, bvx, bvy] = p.ball_start;
        let [px, py] = p.paddle_start;
        Ok(Self {
            restitution: real(p.restitution),
            gravity: real(p.gravity),
            dt: real(p.dt),
            horizon: p.horizon,
            target: p.target.map(real),
            half_length: real(p.paddle_half_length),
            control_weight: real(p.control_weight),
            start: [bx, by, bvx, bvy, px, py].map(real),
        })
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    /// Gap `n·(b(τ) − p(τ))` as a polynomial in the time `τ` since the
    /// current sub-step start.
    fn flight<S: Scalar<T>>(&self, ball: &[S; 4], paddle: &[S; 2], pv: &[S; 2], normal: &[S; 2]) -> Flight<S> {
        let dot = |a0: S, a1: S| normal[0].clone() * a0 + normal[1].clone() * a1;
        Flight {
            a: normal[1].clone() * (-self.gravity * real::<T>(0.5)),
            b: dot(ball[2].clone() - pv[0].clone(), ball[3].clone() - pv[1].clone()),
            c: dot(ball[0].clone() - paddle[0].clone(), ball[1].clone() - paddle[1].clone()),
        }
    }

    /// Smallest `τ ∈ [0, limit]` at which the ball reaches the paddle line
    /// from above (`gap' < 0`) within the segment, polished to a residual of
    /// machine precision.
    pub fn time_of_impact(
        &self,
        ball: &[T; 4],
        paddle: &[T; 2],
        pv: &[T; 2],
        tilt: T,
        limit: T,
    ) -> Option<T> {
        let normal = [-tilt.sin(), tilt.cos()];
        let tangent = [tilt.cos(), tilt.sin()];
        let f = self.flight(ball, paddle, pv, &normal);
        let gap = |t: T| f.c + (f.b + f.a * t) * t;
        let slope = |t: T| f.b + real::<T>(2.0) * f.a * t;
        let mut roots = quadratic_roots(f.a, f.b, f.c);
        roots.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
        roots.into_iter().find_map(|r| {
            if !(r >= T::zero() && r <= limit) {
                return None;
            }
            let mut t = r;
            for _ in 0..3 {
                let s = slope(t);
                if s == T::zero() {
                    break;
                }
                let next = t - gap(t) / s;
                if !next.is_finite() {
                    break;
                }
                t = next;
            }
            let t = t.max(T::zero()).min(limit);
            if !(slope(t) < T::zero()) {
                return None;
            }
            let half_g = self.gravity * real::<T>(0.5);
            let rx = ball[0] + ball[2] * t - paddle[0] - pv[0] * t;
            let ry = ball[1] + ball[3] * t - half_g * t * t - paddle[1] - pv[1] * t;
            let offset = tangent[0] * rx + tangent[1] * ry;
            (offset.abs() <= self.half_length).then_some(t)
        })
    }

    /// Signed distance of the ball above the paddle line.
    pub fn gap(&self, state: &[T], tilt: T) -> T {
        -tilt.sin() * (state[0] - state[4]) + tilt.cos() * (state[1] - state[5])
    }
}

/// Real roots of `a·τ² + b·τ + c`, computed without cancellation.
fn quadratic_roots<T: Float>(a: T, b: T, c: T) -> Vec<T> {
    let scale = a.abs().max(b.abs()).max(c.abs());
    if scale == T::zero() {
        return Vec::new();
    }
    if a.abs() <= T::epsilon() * scale {
        return if b == T::zero() { Vec::new() } else { vec![-c / b] };
    }
    let disc = b * b - real::<T>(4.0) * a * c;
    if disc < T::zero() {
        return Vec::new();
    }
    let q = -real::<T>(0.5) * (b + b.signum() * disc.sqrt());
    if q == T::zero() {
        return vec![T::zero()];
    }
    vec![q / a, c / q]
}

/// One step of the ball-paddle system. The paddle moves at constant
/// velocity `u[0..2]` with tilt `u[2]`; the ball flies ballistically and
/// bounces off the paddle at most [`MAX_IMPACTS`] times.
pub fn tennis_step<T: Float, S: Scalar<T>>(env: &TennisEnv<T>, h: usize, x: &[S], u: &[S]) -> Result<Vec<S>> {
    let half_g = env.gravity * real::<T>(0.5);
    let pv = [u[0].clone(), u[1].clone()];
    let tilt = u[2].clone();
    let normal = [-tilt.sin(), tilt.cos()];
    let mut ball = [x[0].clone(), x[1].clone(), x[2].clone(), x[3].clone()];
    let mut paddle = [x[4].clone(), x[5].clone()];
    let mut remaining = S::constant(env.dt);

    let fly = |ball: &mut [S; 4], paddle: &mut [S; 2], t: &S| {
        ball[0] = ball[0].clone() + ball[2].clone() * t.clone();
        ball[1] = ball[1].clone() + ball[3].clone() * t.clone() - t.square() * half_g;
        ball[3] = ball[3].clone() - t.clone() * env.gravity;
        paddle[0] = paddle[0].clone() + pv[0].clone() * t.clone();
        paddle[1] = paddle[1].clone() + pv[1].clone() * t.clone();
    };

    let values = |v: &[S]| -> Vec<T> { v.iter().map(Scalar::value).collect() };
    let mut impacts = 0;
    loop {
        let bv = values(&ball);
        let impact = env.time_of_impact(
            &[bv[0], bv[1], bv[2], bv[3]],
            &[paddle[0].value(), paddle[1].value()],
            &[pv[0].value(), pv[1].value()],
            tilt.value(),
            remaining.value(),
        );
        let Some(t_star) = impact else { break };
        impacts += 1;
        if impacts > MAX_IMPACTS {
            return Err(Error::SubstepOverflow {
                step: h + 1,
                limit: MAX_IMPACTS,
            });
        }
        // τ = τ* − gap(τ*)/gap'(τ*) carries the implicit derivative of the root.
        let f = env.flight(&ball, &paddle, &pv, &normal);
        let gap = f.c.clone() + (f.b.clone() + f.a.clone() * t_star) * t_star;
        let slope = f.b.value() + real::<T>(2.0) * f.a.value() * t_star;
        let tau = gap / (-slope) + t_star;
        fly(&mut ball, &mut paddle, &tau);
        remaining = remaining - tau;
        let vn = normal[0].clone() * (ball[2].clone() - pv[0].clone())
            + normal[1].clone() * (ball[3].clone() - pv[1].clone());
        let kick = vn * (T::one() + env.restitution);
        ball[2] = ball[2].clone() - kick.clone() * normal[0].clone();
        ball[3] = ball[3].clone() - kick * normal[1].clone();
    }
    fly(&mut ball, &mut paddle, &remaining);
    let [bx, by, bvx, bvy] = ball;
    let [px, py] = paddle;
    Ok(vec![bx, by, bvx, bvy, px, py])
}

impl<T: Float> EnvModel<T> for TennisEnv<T> {
    fn state_dim(&self) -> usize {
        6
    }
    fn input_dim(&self) -> usize {
        3
    }
    fn horizon(&self) -> usize {
        self.horizon
    }
    fn timestep(&self) -> Option<T> {
        Some(self.dt)
    }
    fn smooth_everywhere(&self) -> bool {
        false
    }
    fn initial_state(&self) -> Vec<T> {
        self.start.to_vec()
    }
    fn default_policy(&self) -> Policy {
        Policy::linear_feedback(6, 3, self.horizon)
    }
    fn step<S: Scalar<T>>(&self, h: usize, x: &[S], u: &[S]) -> Result<Vec<S>> {
        tennis_step(self, h, x, u)
    }
    fn cost<S: Scalar<T>>(&self, _h: usize, _x: &[S], u: &[S]) -> Result<S> {
        Ok(u.iter().fold(S::zero(), |acc, ui| acc + ui.square()) * self.control_weight)
    }
    fn terminal_cost<S: Scalar<T>>(&self, x: &[S]) -> Result<Option<S>> {
        Ok(Some(
            (x[0].clone() - self.target[0]).square() + (x[1].clone() - self.target[1]).square(),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffcore::env::finite_difference_jacobians;
    use crate::diffcore::{rollout, rollout_with_gradient};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn env(e: f64) -> TennisEnv<f64> {
        TennisEnv::new(&TennisParams {
            restitution: e,
            ..Default::default()
        })
        .unwrap()
    }

    fn ball_energy(x: &[f64], g: f64) -> f64 {
        0.5 * (x[2] * x[2] + x[3] * x[3]) + g * x[1]
    }

    #[test]
    fn no_event_is_plain_ballistic_step() {
        let env = env(0.9);
        let x = [0.0, 3.0, 1.0, 0.5, 0.0, 0.0];
        let next = tennis_step(&env, 0, &x, &[0.2, 0.0, 0.0]).unwrap();
        let dt = 0.01;
        assert_eq!(next[0], 0.0 + 1.0 * dt);
        assert!((next[1] - (3.0 + 0.5 * dt - 0.5 * 9.81 * dt * dt)).abs() < 1e-15);
        assert!((next[3] - (0.5 - 9.81 * dt)).abs() < 1e-15);
        assert!((next[4] - 0.002).abs() < 1e-15);
    }

    #[test]
    fn elastic_vertical_drop_reverses_velocity() {
        let env = env(1.0);
        // falling straight down, 1 mm above a static horizontal paddle
        let x = [0.0, 0.001, 0.0, -2.0, 0.0, 0.0];
        let next = tennis_step(&env, 0, &x, &[0.0, 0.0, 0.0]).unwrap();
        assert!(next[3] > 0.0);
        let e0 = ball_energy(&x, 9.81);
        assert!((ball_energy(&next, 9.81) - e0).abs() <= 1e-9 * e0.abs());
        // speed at impact equals the speed just after reflection
        let t = env
            .time_of_impact(&[0.0, 0.001, 0.0, -2.0], &[0.0, 0.0], &[0.0, 0.0], 0.0, 0.01)
            .unwrap();
        let v_in = -2.0 - 9.81 * t;
        let v_out = -v_in - 9.81 * (0.01 - t);
        assert!((next[3] - v_out).abs() < 1e-12);
    }

    #[test]
    fn tilted_static_paddle_conserves_energy() {
        let env = env(1.0);
        let x = [0.0, 0.01, 0.3, -1.5, 0.0, 0.0];
        let next = tennis_step(&env, 0, &x, &[0.0, 0.0, 0.2]).unwrap();
        let e0 = ball_energy(&x, 9.81);
        assert!((ball_energy(&next, 9.81) - e0).abs() <= 1e-9 * e0.abs());
        assert!(next[2] < 0.3, "tilt should deflect the ball: {next:?}");
    }

    #[test]
    fn impact_time_residual() {
        let env = env(0.9);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut found = 0;
        while found < 1000 {
            let ball = [
                rng.random_range(-0.2..0.2),
                rng.random_range(0.0..0.05),
                rng.random_range(-3.0..3.0),
                rng.random_range(-6.0..0.0),
            ];
            let paddle = [rng.random_range(-0.1..0.1), rng.random_range(-0.02..0.02)];
            let pv = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            let tilt = rng.random_range(-0.5..0.5);
            if let Some(t) = env.time_of_impact(&ball, &paddle, &pv, tilt, 0.01) {
                let (s, c) = (f64::sin(tilt), f64::cos(tilt));
                let bx = ball[0] + ball[2] * t - paddle[0] - pv[0] * t;
                let by = ball[1] + ball[3] * t - 0.5 * 9.81 * t * t - paddle[1] - pv[1] * t;
                assert!((-s * bx + c * by).abs() <= 1e-9);
                found += 1;
            }
        }
    }

    #[test]
    fn step_jacobian_through_impact_matches_finite_differences() {
        let env = env(0.9);
        let x = [0.02, 0.01, 0.4, -1.7, 0.0, -0.003];
        let u = [0.3, 0.5, 0.15];
        let (jx, ju) = env.step_jacobians(0, &x, &u).unwrap();
        let (fx, fu) = finite_difference_jacobians(&env, 0, &x, &u, 1e-7).unwrap();
        assert!(jx.max_relative_error(&fx) < 1e-5, "{jx:?}\n{fx:?}");
        assert!(ju.max_relative_error(&fu) < 1e-5, "{ju:?}\n{fu:?}");
    }

    #[test]
    fn default_rollout_bounces_and_differentiates() {
        let env = env(0.9);
        let policy = env.default_policy();
        assert_eq!(policy.param_dim(), 21);
        let theta = vec![0.0; 21];
        let noises = vec![vec![0.0; 3]; env.horizon()];
        let traj = rollout(&env, &policy, &theta, &env.initial_state(), &noises).unwrap();
        let bounces = traj.states.windows(2).filter(|w| w[0][3] < 0.0 && w[1][3] > 0.0).count();
        assert_eq!(bounces, 1);
        let (v, g) = rollout_with_gradient(&env, &policy, &theta, &env.initial_state(), &noises).unwrap();
        assert_eq!(v, traj.total_cost);
        assert!(g.iter().all(|x| x.is_finite()));
    }
}
