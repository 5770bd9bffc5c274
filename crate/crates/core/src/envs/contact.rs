//! Penalty-contact pushing and a box carried by friction, both integrated
//! with semi-implicit Euler.

use serde::{Deserialize, Serialize};

use crate::diffcore::EnvModel;
use crate::envs::scalar_envs::relaxed_sign;
use crate::error::{Error, Result};
use crate::scalar::{real, Float, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PushingParams {
    pub mass1: f64,
    pub mass2: f64,
    pub half_width1: f64,
    pub half_width2: f64,
    /// Contact spring constant (N/m).
    pub stiffness: f64,
    /// Contact damping (N·s/m).
    pub damping: f64,
    pub dt: f64,
    pub horizon: usize,
    /// Target position of body 2.
    pub goal: f64,
    /// Initial surface-to-surface distance.
    pub initial_gap: f64,
    /// Open-loop force applied at every step by the default parameters.
    pub nominal_force: f64,
    /// Position of a fixed stop in front of body 2, using the same contact
    /// law. Stable runs never reach it; past the integrator's stability limit
    /// bodies bounce off it and each other with growing speed.
    pub stop_position: f64,
}

impl Default for PushingParams {
    fn default() -> Self {
        Self {
            mass1: 1.0,
            mass2: 1.0,
            half_width1: 0.1,
            half_width2: 0.1,
            stiffness: 100.0,
            damping: 0.5,
            dt: 0.01,
            horizon: 200,
            goal: 1.0,
            initial_gap: 0.02,
            nominal_force: 1.0,
            stop_position: 2.5,
        }
    }
}

/// Body 1 is pushed by the control force and pushes body 2 through a
/// penalty spring-damper: with penetration `p = max(0, −gap)` the contact
/// force is `k·p + c·(v1 − v2)` while `p > 0` and zero otherwise, so exactly
/// zero penetration takes the zero-force branch.
///
/// Body 2 meets a fixed stop at `stop_position` through the same law.
///
/// State `[x1, v1, x2, v2]`, one input (force on body 1), running cost
/// `(x2_h − goal)²`.
#[derive(Clone, Debug, PartialEq)]
pub struct PushingEnv<T> {
    m1: T,
    m2: T,
    contact_offset: T,
    k: T,
    c: T,
    dt: T,
    horizon: usize,
    goal: T,
    initial_gap: T,
    nominal_force: T,
    stop: T,
    half_width2: T,
}

impl<T: Float> PushingEnv<T> {
    pub fn new(p: PushingParams) -> Result<Self> {
        let positive = [p.mass1, p.mass2, p.dt, p.stiffness]
            .iter()
            .all(|&v| v > 0.0 && v.is_finite());
        let nonneg = [p.half_width1, p.half_width2, p.damping]
            .iter()
            .all(|&v| v >= 0.0 && v.is_finite());
        let clear = p.stop_position - p.half_width2 > p.half_width1 + p.half_width2 + p.initial_gap;
        if !positive || !nonneg || p.horizon == 0 || !clear {
            return Err(Error::Domain("pushing parameters out of range".into()));
        }
        Ok(Self {
            m1: real(p.mass1),
            m2: real(p.mass2),
            contact_offset: real(p.half_width1 + p.half_width2),
            k: real(p.stiffness),
            c: real(p.damping),
            dt: real(p.dt),
            horizon: p.horizon,
            goal: real(p.goal),
            initial_gap: real(p.initial_gap),
            nominal_force: real(p.nominal_force),
            stop: real(p.stop_position),
            half_width2: real(p.half_width2),
        })
    }

    fn stop_gap<S: Scalar<T>>(&self, x: &[S]) -> S {
        -x[2].clone() - self.half_width2 + self.stop
    }

    /// Force the stop exerts on body 2.
    pub fn stop_force<S: Scalar<T>>(&self, x: &[S]) -> S {
        let gap = self.stop_gap(x);
        if gap.value() < T::zero() {
            gap * self.k - x[3].clone() * self.c
        } else {
            S::zero()
        }
    }

    fn gap<S: Scalar<T>>(&self, x: &[S]) -> S {
        x[2].clone() - x[0].clone() - self.contact_offset
    }

    /// Force body 1 exerts on body 2.
    pub fn contact_force<S: Scalar<T>>(&self, x: &[S]) -> S {
        let gap = self.gap(x);
        if gap.value() < T::zero() {
            -gap * self.k + (x[1].clone() - x[3].clone()) * self.c
        } else {
            S::zero()
        }
    }

    pub fn momentum(&self, x: &[T]) -> T {
        self.m1 * x[1] + self.m2 * x[3]
    }
}

/// One semi-implicit Euler step of the pushing system.
pub fn pushing_step<T: Float, S: Scalar<T>>(env: &PushingEnv<T>, x: &[S], u: &S) -> Vec<S> {
    let f = env.contact_force(x);
    let v1 = x[1].clone() + (u.clone() - f.clone()) * (env.dt / env.m1);
    let v2 = x[3].clone() + (f + env.stop_force(x)) * (env.dt / env.m2);
    vec![
        x[0].clone() + v1.clone() * env.dt,
        v1,
        x[2].clone() + v2.clone() * env.dt,
        v2,
    ]
}

impl<T: Float> EnvModel<T> for PushingEnv<T> {
    fn state_dim(&self) -> usize {
        4
    }
    fn input_dim(&self) -> usize {
        1
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
        vec![
            T::zero(),
            T::zero(),
            self.contact_offset + self.initial_gap,
            T::zero(),
        ]
    }
    fn default_theta(&self) -> Vec<T> {
        vec![self.nominal_force; self.horizon]
    }
    fn divergence_bound(&self) -> T {
        real(1e6)
    }
    fn step<S: Scalar<T>>(&self, _h: usize, x: &[S], u: &[S]) -> Result<Vec<S>> {
        Ok(pushing_step(self, x, &u[0]))
    }
    fn cost<S: Scalar<T>>(&self, _h: usize, x: &[S], _u: &[S]) -> Result<S> {
        Ok((x[2].clone() - self.goal).square())
    }
    fn on_kink(&self, _h: usize, x: &[T], _u: &[T]) -> bool {
        self.gap(x) == T::zero() || self.stop_gap(x) == T::zero()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FrictionParams {
    pub mu: f64,
    /// Normal force between box and carrier (N).
    pub normal_force: f64,
    /// Slip tolerance of the relaxed friction law (m/s).
    pub nu: f64,
    /// The box falls once its offset from the carrier centre exceeds this (m).
    pub half_length: f64,
    pub carrier_mass: f64,
    pub box_mass: f64,
    pub dt: f64,
    pub horizon: usize,
    /// Target box position.
    pub goal: f64,
    /// Weight of the quadratic control cost.
    pub control_weight: f64,
    /// Open-loop force applied at every step by the default parameters.
    pub nominal_force: f64,
}

impl Default for FrictionParams {
    fn default() -> Self {
        Self {
            mu: 0.5,
            normal_force: 9.81,
            nu: 0.1,
            half_length: 0.5,
            carrier_mass: 1.0,
            box_mass: 1.0,
            dt: 0.01,
            horizon: 100,
            goal: 1.0,
            control_weight: 1e-3,
            nominal_force: 2.0,
        }
    }
}

/// A box resting on a carrier that the control force accelerates. The box
/// is dragged along by relaxed Coulomb friction `μ·N·S̄_ν(v_carrier − v_box)`;
/// once the box has slid more than the carrier half-length off centre it
/// falls, stops, and no longer interacts.
///
/// State `[x_carrier, v_carrier, x_box, v_box, on_carrier]` where the last
/// entry is 1 or 0. Running cost `(x_box − goal)² + r·u²`. Branch rules: flat
/// friction branch at `|v_rel| = ν/2`; an offset of exactly the half-length
/// still counts as on the carrier.
#[derive(Clone, Debug, PartialEq)]
pub struct FrictionEnv<T> {
    friction: T,
    nu: T,
    half_length: T,
    carrier_mass: T,
    box_mass: T,
    dt: T,
    horizon: usize,
    goal: T,
    control_weight: T,
    nominal_force: T,
}

impl<T: Float> FrictionEnv<T> {
    pub fn new(p: FrictionParams) -> Result<Self> {
        let positive = [p.nu, p.half_length, p.carrier_mass, p.box_mass, p.dt]
            .iter()
            .all(|&v| v > 0.0 && v.is_finite());
        let nonneg = [p.mu, p.normal_force, p.control_weight]
            .iter()
            .all(|&v| v >= 0.0 && v.is_finite());
        if !positive || !nonneg || p.horizon == 0 {
            return Err(Error::Domain("friction parameters out of range".into()));
        }
        Ok(Self {
            friction: real(p.mu * p.normal_force),
            nu: real(p.nu),
            half_length: real(p.half_length),
            carrier_mass: real(p.carrier_mass),
            box_mass: real(p.box_mass),
            dt: real(p.dt),
            horizon: p.horizon,
            goal: real(p.goal),
            control_weight: real(p.control_weight),
            nominal_force: real(p.nominal_force),
        })
    }
}

impl<T: Float> EnvModel<T> for FrictionEnv<T> {
    fn state_dim(&self) -> usize {
        5
    }
    fn input_dim(&self) -> usize {
        1
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
        vec![T::zero(), T::zero(), T::zero(), T::zero(), T::one()]
    }
    fn default_theta(&self) -> Vec<T> {
        vec![self.nominal_force; self.horizon]
    }
    fn step<S: Scalar<T>>(&self, _h: usize, x: &[S], u: &[S]) -> Result<Vec<S>> {
        let dt = self.dt;
        if x[4].value() <= real::<T>(0.5) {
            let vc = x[1].clone() + u[0].clone() * (dt / self.carrier_mass);
            return Ok(vec![
                x[0].clone() + vc.clone() * dt,
                vc,
                x[2].clone(),
                S::zero(),
                S::zero(),
            ]);
        }
        let f = relaxed_sign(&(x[1].clone() - x[3].clone()), self.nu) * self.friction;
        let vc = x[1].clone() + (u[0].clone() - f.clone()) * (dt / self.carrier_mass);
        let vb = x[3].clone() + f * (dt / self.box_mass);
        let xc = x[0].clone() + vc.clone() * dt;
        let xb = x[2].clone() + vb.clone() * dt;
        if (xb.value() - xc.value()).abs() > self.half_length {
            return Ok(vec![xc, vc, xb, S::zero(), S::zero()]);
        }
        Ok(vec![xc, vc, xb, vb, S::constant(T::one())])
    }
    fn cost<S: Scalar<T>>(&self, _h: usize, x: &[S], u: &[S]) -> Result<S> {
        Ok((x[2].clone() - self.goal).square() + u[0].square() * self.control_weight)
    }
    fn on_kink(&self, _h: usize, x: &[T], _u: &[T]) -> bool {
        x[4] > real::<T>(0.5) && (x[1] - x[3]).abs() == self.nu * real::<T>(0.5)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffcore::env::{finite_difference_cost_gradients, finite_difference_jacobians};
    use crate::diffcore::{rollout, rollout_with_gradient};

    fn pushing(k: f64) -> PushingEnv<f64> {
        PushingEnv::new(PushingParams {
            stiffness: k,
            ..Default::default()
        })
        .unwrap()
    }

    #[test]
    fn free_motion_without_contact() {
        let env = pushing(1e3);
        let x = [0.0, 0.7, 1.0, -0.2];
        let next = pushing_step(&env, &x, &0.0);
        let expected = [0.007, 0.7, 0.998, -0.2];
        for (a, b) in next.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn momentum_conserved_in_contact() {
        for k in [10.0, 1e2, 1e3, 1e4] {
            let env = PushingEnv::<f64>::new(PushingParams {
                stiffness: k,
                stop_position: 100.0,
                ..Default::default()
            })
            .unwrap();
            // overlapping and approaching
            let mut x = vec![0.0, 1.0, 0.15, 0.0];
            let p0 = env.momentum(&x);
            for _ in 0..200 {
                x = pushing_step(&env, &x, &0.0);
            }
            assert!((env.momentum(&x) - p0).abs() <= 1e-9 * p0.abs(), "k={k}");
        }
    }

    #[test]
    fn jacobians_match_finite_differences_in_contact() {
        let env = pushing(1e3);
        let x = [0.0, 0.3, 0.19, -0.1];
        let u = [0.8];
        let (jx, ju) = env.step_jacobians(0, &x, &u).unwrap();
        let (fx, fu) = finite_difference_jacobians(&env, 0, &x, &u, 1e-5).unwrap();
        assert!(jx.max_relative_error(&fx) < 1e-5);
        assert!(ju.max_relative_error(&fu) < 1e-5);
        let (gx, gu) = env.cost_gradients(0, &x, &u).unwrap();
        let (cx, cu) = finite_difference_cost_gradients(&env, 0, &x, &u, 1e-5).unwrap();
        for (a, b) in gx.iter().chain(&gu).zip(cx.iter().chain(&cu)) {
            assert!((a - b).abs() < 1e-5 * b.abs().max(1.0));
        }
    }

    #[test]
    fn zero_penetration_takes_zero_force_branch() {
        let env = pushing(1e3);
        let x = [0.0, 1.0, 0.2, 0.0];
        assert_eq!(env.contact_force(&x), 0.0);
        assert!(env.on_kink(0, &x, &[0.0]));
    }

    #[test]
    fn stop_pushes_back() {
        let env = pushing(1e3);
        let x = [0.0, 0.0, 2.45, 1.0];
        // 0.05 penetration, moving into the stop
        assert!((env.stop_force(&x) - (-50.0 - 0.5)).abs() < 1e-12);
        assert_eq!(env.stop_force(&[0.0, 0.0, 2.0, 1.0]), 0.0);
    }

    #[test]
    fn stiff_contact_diverges_past_stability_limit() {
        let env = pushing(1e6);
        let policy = env.default_policy();
        let theta = env.default_theta();
        let noises = vec![vec![0.0]; env.horizon()];
        let err = rollout(&env, &policy, &theta, &env.initial_state(), &noises).unwrap_err();
        assert!(err.is_divergence());
        assert!(rollout(&pushing(1e4), &policy, &theta, &env.initial_state(), &noises).is_ok());
    }

    fn friction() -> FrictionEnv<f64> {
        FrictionEnv::new(FrictionParams::default()).unwrap()
    }

    #[test]
    fn friction_jacobians_inside_no_fall_region() {
        let env = friction();
        // relative velocity inside the linear region
        let x = [0.1, 0.52, 0.12, 0.5, 1.0];
        let (jx, ju) = env.step_jacobians(0, &x, &[1.5]).unwrap();
        let (fx, fu) = finite_difference_jacobians(&env, 0, &x, &[1.5], 1e-6).unwrap();
        assert!(jx.max_relative_error(&fx) < 1e-5);
        assert!(ju.max_relative_error(&fu) < 1e-5);
    }

    #[test]
    fn box_falls_off_when_pulled_too_hard() {
        let env = friction();
        let policy = env.default_policy();
        let noises = vec![vec![0.0]; env.horizon()];
        let gentle = rollout(&env, &policy, &vec![1.0; 100], &env.initial_state(), &noises).unwrap();
        assert_eq!(gentle.states.last().unwrap()[4], 1.0);
        let violent =
            rollout(&env, &policy, &vec![40.0; 100], &env.initial_state(), &noises).unwrap();
        assert_eq!(violent.states.last().unwrap()[4], 0.0);
    }

    #[test]
    fn friction_gradient_matches_finite_differences_without_fall() {
        let env = friction();
        let policy = env.default_policy();
        let theta: Vec<f64> = (0..100).map(|i| 1.0 + 0.01 * i as f64).collect();
        let noises = vec![vec![0.0]; env.horizon()];
        let x1 = env.initial_state();
        let (_, g) = rollout_with_gradient(&env, &policy, &theta, &x1, &noises).unwrap();
        for j in [0usize, 37, 99] {
            let step = 1e-6 * theta[j].abs().max(1.0);
            let (mut p, mut m) = (theta.clone(), theta.clone());
            p[j] += step;
            m[j] -= step;
            let fp = rollout(&env, &policy, &p, &x1, &noises).unwrap().total_cost;
            let fm = rollout(&env, &policy, &m, &x1, &noises).unwrap().total_cost;
            let fd = (fp - fm) / (2.0 * step);
            assert!((g[j] - fd).abs() <= 1e-5 * fd.abs().max(1.0), "{j}: {} vs {fd}", g[j]);
        }
    }
}
