//! Frictionless two-link pendulum, integrated with classical RK4.

use serde::{Deserialize, Serialize};

use crate::diffcore::{EnvModel, Policy};
use crate::error::{Error, Result};
use crate::scalar::{real, Float, Scalar};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PendulumParams {
    pub m1: f64,
    pub m2: f64,
    pub l1: f64,
    pub l2: f64,
    pub g: f64,
    pub dt: f64,
    /// Number of RK4 steps between the initial and the terminal state.
    pub steps: usize,
    /// Target `(θ1, θ2, θ̇1, θ̇2)` of the terminal cost.
    pub goal: [f64; 4],
    /// Initial angles used by the default parameters.
    pub initial_angles: [f64; 2],
}

impl Default for PendulumParams {
    fn default() -> Self {
        Self {
            m1: 1.0,
            m2: 1.0,
            l1: 1.0,
            l2: 1.0,
            g: 9.81,
            dt: 0.01,
            steps: 100,
            goal: [0.0; 4],
            initial_angles: [2.0, 2.0],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PendulumDynamics<T> {
    pub m1: T,
    pub m2: T,
    pub l1: T,
    pub l2: T,
    pub g: T,
}

impl<T: Float> PendulumDynamics<T> {
    /// `(θ̇1, θ̇2, θ̈1, θ̈2)`, angles measured from the downward vertical.
    pub fn derivative<S: Scalar<T>>(&self, q: &[S]) -> [S; 4] {
        let (m1, m2, l1, l2, g) = (self.m1, self.m2, self.l1, self.l2, self.g);
        let two = real::<T>(2.0);
        let delta = q[0].clone() - q[1].clone();
        let (sd, cd) = (delta.sin(), delta.cos());
        let w1sq = q[2].square();
        let w2sq = q[3].square();
        let den = S::constant(two * m1 + m2) - (delta.clone() * two).cos() * m2;
        let a1 = (q[0].sin() * (-g * (two * m1 + m2))
            - (q[0].clone() - q[1].clone() * two).sin() * (m2 * g)
            - sd.clone() * (w2sq.clone() * l2 + w1sq.clone() * cd.clone() * l1) * (two * m2))
            / (den.clone() * l1);
        let a2 = (sd * two)
            * (w1sq * (l1 * (m1 + m2)) + q[0].cos() * (g * (m1 + m2)) + w2sq * cd * (l2 * m2))
            / (den * l2);
        [q[2].clone(), q[3].clone(), a1, a2]
    }

    /// Kinetic plus potential energy.
    pub fn energy(&self, q: &[T]) -> T {
        let (m1, m2, l1, l2, g) = (self.m1, self.m2, self.l1, self.l2, self.g);
        let half = real::<T>(0.5);
        let kinetic = half * (m1 + m2) * l1 * l1 * q[2] * q[2]
            + half * m2 * l2 * l2 * q[3] * q[3]
            + m2 * l1 * l2 * q[2] * q[3] * (q[0] - q[1]).cos();
        let potential = -(m1 + m2) * g * l1 * q[0].cos() - m2 * g * l2 * q[1].cos();
        kinetic + potential
    }
}

/// One classical Runge-Kutta step of size `dt`.
pub fn double_pendulum_step<T: Float, S: Scalar<T>>(
    dynamics: &PendulumDynamics<T>,
    q: &[S],
    dt: T,
) -> Vec<S> {
    let half = dt * real::<T>(0.5);
    let shifted = |k: &[S; 4], s: T| -> Vec<S> {
        q.iter()
            .zip(k)
            .map(|(qi, ki)| qi.clone() + ki.clone() * s)
            .collect()
    };
    let k1 = dynamics.derivative(q);
    let k2 = dynamics.derivative(&shifted(&k1, half));
    let k3 = dynamics.derivative(&shifted(&k2, half));
    let k4 = dynamics.derivative(&shifted(&k3, dt));
    let sixth = dt / real::<T>(6.0);
    let two = real::<T>(2.0);
    (0..4)
        .map(|i| {
            q[i].clone()
                + (k1[i].clone() + k2[i].clone() * two + k3[i].clone() * two + k4[i].clone())
                    * sixth
        })
        .collect()
}

/// The decision is the pendulum's initial position. The environment is a
/// single decision step: the two inputs are added to the initial angles
/// (both velocities start at rest), and the step integrates `steps` RK4
/// steps. The terminal cost is `‖q_final − q^g‖²`.
#[derive(Clone, Debug, PartialEq)]
pub struct DoublePendulumEnv<T> {
    dynamics: PendulumDynamics<T>,
    dt: T,
    steps: usize,
    goal: [T; 4],
    initial_angles: [T; 2],
}

impl<T: Float> DoublePendulumEnv<T> {
    pub fn new(p: &PendulumParams) -> Result<Self> {
        let positive = [p.m1, p.m2, p.l1, p.l2, p.g, p.dt]
            .iter()
            .all(|&v| v > 0.0 && v.is_finite());
        if !positive || p.steps == 0 {
            return Err(Error::Domain("pendulum parameters out of range".into()));
        }
        Ok(Self {
            dynamics: PendulumDynamics {
                m1: real(p.m1),
                m2: real(p.m2),
                l1: real(p.l1),
                l2: real(p.l2),
                g: real(p.g),
            },
            dt: real(p.dt),
            steps: p.steps,
            goal: p.goal.map(real),
            initial_angles: p.initial_angles.map(real),
        })
    }

    pub fn dynamics(&self) -> &PendulumDynamics<T> {
        &self.dynamics
    }

    pub fn steps(&self) -> usize {
        self.steps
    }
}

impl<T: Float> EnvModel<T> for DoublePendulumEnv<T> {
    fn state_dim(&self) -> usize {
        4
    }
    fn input_dim(&self) -> usize {
        2
    }
    fn horizon(&self) -> usize {
        1
    }
    fn timestep(&self) -> Option<T> {
        Some(self.dt)
    }
    fn smooth_everywhere(&self) -> bool {
        true
    }
    fn initial_state(&self) -> Vec<T> {
        vec![T::zero(); 4]
    }
    fn default_policy(&self) -> Policy {
        Policy::open_loop(4, 2, 1)
    }
    fn default_theta(&self) -> Vec<T> {
        self.initial_angles.to_vec()
    }
    fn step<S: Scalar<T>>(&self, _h: usize, x: &[S], u: &[S]) -> Result<Vec<S>> {
        let mut q = vec![
            x[0].clone() + u[0].clone(),
            x[1].clone() + u[1].clone(),
            x[2].clone(),
            x[3].clone(),
        ];
        for _ in 0..self.steps {
            q = double_pendulum_step(&self.dynamics, &q, self.dt);
        }
        Ok(q)
    }
    fn cost<S: Scalar<T>>(&self, _h: usize, _x: &[S], _u: &[S]) -> Result<S> {
        Ok(S::zero())
    }
    fn terminal_cost<S: Scalar<T>>(&self, x: &[S]) -> Result<Option<S>> {
        Ok(Some(
            x.iter()
                .zip(&self.goal)
                .fold(S::zero(), |acc, (xi, &gi)| acc + (xi.clone() - gi).square()),
        ))
    }
}
