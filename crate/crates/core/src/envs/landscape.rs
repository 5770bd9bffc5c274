//! One-step decision problems with discontinuous landscapes: throwing a ball
//! over a wall, and striking a pivoting bar.

use serde::{Deserialize, Serialize};

use crate::diffcore::EnvModel;
use crate::error::{Error, Result};
use crate::scalar::{real, Float, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BallWallParams {
    /// Launch speed (m/s).
    pub v0: f64,
    /// Gravity (m/s²).
    pub g: f64,
    /// Horizontal distance to the wall (m).
    pub wall_distance: f64,
    /// Wall height (m).
    pub wall_height: f64,
}

impl Default for BallWallParams {
    fn default() -> Self {
        Self {
            v0: 10.0,
            g: 9.81,
            wall_distance: 5.0,
            wall_height: 2.0,
        }
    }
}

/// Projectile launched from the origin at angle `θ`; the cost is the
/// negative landing distance.
///
/// A ball that clears the wall lands at its free range. Any other throw ends
/// at the wall: it either hits the wall below the top and drops there
/// inelastically, or lands short and rolls on until the wall stops it. The
/// landscape is therefore flat at `−x_w` over every blocked angle, including
/// angles outside `(0, π/2)` that noise can produce, and jumps at the
/// clearance angles (about 0.677 and 1.27 rad with the defaults). Branch
/// rule: at zero clearance the ball counts as blocked.
#[derive(Clone, Debug, PartialEq)]
pub struct BallWallEnv<T> {
    v0: T,
    g: T,
    wall_distance: T,
    wall_height: T,
}

impl<T: Float> BallWallEnv<T> {
    pub fn new(params: BallWallParams) -> Result<Self> {
        let all_positive = [params.v0, params.g, params.wall_distance, params.wall_height]
            .iter()
            .all(|&p| p > 0.0 && p.is_finite());
        if !all_positive {
            return Err(Error::Domain("ball-wall parameters must be positive".into()));
        }
        Ok(Self {
            v0: real(params.v0),
            g: real(params.g),
            wall_distance: real(params.wall_distance),
            wall_height: real(params.wall_height),
        })
    }

    pub fn wall_distance(&self) -> T {
        self.wall_distance
    }

    /// Free-flight range `v0²·sin(2θ)/g`.
    pub fn range<S: Scalar<T>>(&self, theta: &S) -> S {
        (theta.clone() * real::<T>(2.0)).sin() * (self.v0 * self.v0 / self.g)
    }

    /// Height of the trajectory at the wall minus the wall height.
    pub fn clearance<S: Scalar<T>>(&self, theta: &S) -> S {
        let xw = self.wall_distance;
        let cos = theta.cos();
        let drop = S::constant(self.g * xw * xw / (real::<T>(2.0) * self.v0 * self.v0))
            / (cos.clone() * cos);
        theta.tan() * xw - drop - self.wall_height
    }

    /// Whether a launch at `theta` passes over the wall.
    pub fn clears_wall(&self, theta: T) -> bool {
        theta > T::zero() && theta < T::FRAC_PI_2() && self.clearance(&theta) > T::zero()
    }

    /// Cost of a launch at any angle.
    pub fn landing_cost<S: Scalar<T>>(&self, theta: &S) -> S {
        if self.clears_wall(theta.value()) {
            -self.range(theta)
        } else {
            S::constant(-self.wall_distance)
        }
    }

    /// Closed-form cost and its almost-everywhere derivative for `θ ∈ (0, π/2)`.
    pub fn cost_and_derivative(&self, theta: T) -> Result<(T, T)> {
        if !(theta > T::zero() && theta < T::FRAC_PI_2()) {
            return Err(Error::Domain(format!("launch angle {theta} outside (0, π/2)")));
        }
        let d = crate::dual::Dual::variable(theta, 0, 1);
        let c = self.landing_cost(&d);
        Ok((c.re(), c.gradient(1)[0]))
    }
}

/// Closed-form ball-wall cost for `θ ∈ (0, π/2)`.
pub fn ball_wall_cost<T: Float>(theta: T, params: BallWallParams) -> Result<T> {
    Ok(BallWallEnv::new(params)?.cost_and_derivative(theta)?.0)
}

impl<T: Float> EnvModel<T> for BallWallEnv<T> {
    fn state_dim(&self) -> usize {
        1
    }
    fn input_dim(&self) -> usize {
        1
    }
    fn horizon(&self) -> usize {
        1
    }
    fn smooth_everywhere(&self) -> bool {
        false
    }
    fn initial_state(&self) -> Vec<T> {
        vec![T::zero()]
    }
    fn default_theta(&self) -> Vec<T> {
        vec![real(0.45)]
    }
    fn step<S: Scalar<T>>(&self, _h: usize, x: &[S], _u: &[S]) -> Result<Vec<S>> {
        Ok(x.to_vec())
    }
    fn cost<S: Scalar<T>>(&self, _h: usize, _x: &[S], u: &[S]) -> Result<S> {
        Ok(self.landing_cost(&u[0]))
    }
    fn on_kink(&self, _h: usize, _x: &[T], u: &[T]) -> bool {
        u[0] > T::zero() && u[0] < T::FRAC_PI_2() && self.clearance(&u[0]) == T::zero()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MomentumParams {
    /// Bar half-length (m).
    pub half_length: f64,
    /// Ball mass (kg).
    pub mass: f64,
    /// Approach speed (m/s).
    pub speed: f64,
    /// Cost of missing the bar.
    pub miss_penalty: f64,
}

impl Default for MomentumParams {
    fn default() -> Self {
        Self {
            half_length: 1.0,
            mass: 1.0,
            speed: 5.0,
            miss_penalty: 10.0,
        }
    }
}

/// A ball strikes a bar pivoting at its centre at offset `θ` from the pivot.
/// The cost is the negative transferred angular momentum `−m·v·θ` on
/// `[0, L]`, and the miss penalty `P` outside, so the best hit sits at the
/// edge of a cliff. Both ends of `[0, L]` count as hits.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentumTransferEnv<T> {
    half_length: T,
    mass: T,
    speed: T,
    miss_penalty: T,
}

impl<T: Float> MomentumTransferEnv<T> {
    pub fn new(params: MomentumParams) -> Result<Self> {
        let positive = [params.half_length, params.mass, params.speed]
            .iter()
            .all(|&p| p > 0.0 && p.is_finite());
        if !positive || !params.miss_penalty.is_finite() {
            return Err(Error::Domain("momentum-transfer parameters out of range".into()));
        }
        Ok(Self {
            half_length: real(params.half_length),
            mass: real(params.mass),
            speed: real(params.speed),
            miss_penalty: real(params.miss_penalty),
        })
    }

    pub fn half_length(&self) -> T {
        self.half_length
    }

    pub fn miss_penalty(&self) -> T {
        self.miss_penalty
    }

    pub fn impact_cost<S: Scalar<T>>(&self, offset: &S) -> S {
        let t = offset.value();
        if t >= T::zero() && t <= self.half_length {
            -(offset.clone() * (self.mass * self.speed))
        } else {
            S::constant(self.miss_penalty)
        }
    }
}

impl<T: Float> EnvModel<T> for MomentumTransferEnv<T> {
    fn state_dim(&self) -> usize {
        1
    }
    fn input_dim(&self) -> usize {
        1
    }
    fn horizon(&self) -> usize {
        1
    }
    fn smooth_everywhere(&self) -> bool {
        false
    }
    fn initial_state(&self) -> Vec<T> {
        vec![T::zero()]
    }
    fn default_theta(&self) -> Vec<T> {
        vec![self.half_length * real::<T>(0.7)]
    }
    fn step<S: Scalar<T>>(&self, _h: usize, x: &[S], _u: &[S]) -> Result<Vec<S>> {
        Ok(x.to_vec())
    }
    fn cost<S: Scalar<T>>(&self, _h: usize, _x: &[S], u: &[S]) -> Result<S> {
        Ok(self.impact_cost(&u[0]))
    }
    fn on_kink(&self, _h: usize, _x: &[T], u: &[T]) -> bool {
        u[0] == T::zero() || u[0] == self.half_length
    }
}
