use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::{Float, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    /// `π_h(x, θ) = θ_h`, one `m`-block of θ per step.
    OpenLoop,
    /// `π(x, θ) = K·[x; 1]` with θ the row-major flattening of `K ∈ R^{m×(n+1)}`.
    LinearFeedback,
}

/// A deterministic policy family. Parameters are passed alongside, never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct Policy {
    kind: PolicyKind,
    state_dim: usize,
    input_dim: usize,
    horizon: usize,
}

impl Policy {
    pub fn new(kind: PolicyKind, state_dim: usize, input_dim: usize, horizon: usize) -> Self {
        Self {
            kind,
            state_dim,
            input_dim,
            horizon,
        }
    }

    pub fn open_loop(state_dim: usize, input_dim: usize, horizon: usize) -> Self {
        Self::new(PolicyKind::OpenLoop, state_dim, input_dim, horizon)
    }

    pub fn linear_feedback(state_dim: usize, input_dim: usize, horizon: usize) -> Self {
        Self::new(PolicyKind::LinearFeedback, state_dim, input_dim, horizon)
    }

    pub fn kind(&self) -> PolicyKind {
        self.kind
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Number of parameters `d`.
    pub fn param_dim(&self) -> usize {
        match self.kind {
            PolicyKind::OpenLoop => self.input_dim * self.horizon,
            PolicyKind::LinearFeedback => self.input_dim * (self.state_dim + 1),
        }
    }

    fn check(&self, h: usize, x_len: usize, theta_len: usize) -> Result<()> {
        if h >= self.horizon {
            return Err(Error::Index {
                index: h,
                len: self.horizon,
            });
        }
        if x_len != self.state_dim {
            return Err(Error::dimension("policy state", self.state_dim, x_len));
        }
        if theta_len != self.param_dim() {
            return Err(Error::dimension("policy parameters", self.param_dim(), theta_len));
        }
        Ok(())
    }

    /// Evaluates `π_h(x, θ)` (0-based step index `h`).
    pub fn eval<T: Float, S: Scalar<T>>(&self, h: usize, x: &[S], theta: &[S]) -> Result<Vec<S>> {
        self.check(h, x.len(), theta.len())?;
        let m = self.input_dim;
        Ok(match self.kind {
            PolicyKind::OpenLoop => theta[h * m..(h + 1) * m].to_vec(),
            PolicyKind::LinearFeedback => {
                let cols = self.state_dim + 1;
                (0..m)
                    .map(|i| {
                        let row = &theta[i * cols..(i + 1) * cols];
                        row[..self.state_dim]
                            .iter()
                            .zip(x)
                            .fold(row[self.state_dim].clone(), |acc, (k, xj)| {
                                acc + k.clone() * xj.clone()
                            })
                    })
                    .collect()
            }
        })
    }

    /// `D_θπ_h(x, θ)`, an `m×d` matrix. Both policy kinds are linear in θ.
    pub fn jacobian<T: Float>(&self, h: usize, x: &[T], theta: &[T]) -> Result<Matrix<T>> {
        self.check(h, x.len(), theta.len())?;
        let (m, d) = (self.input_dim, self.param_dim());
        let mut jac = Matrix::zeros(m, d);
        match self.kind {
            PolicyKind::OpenLoop => {
                for i in 0..m {
                    jac[(i, h * m + i)] = T::one();
                }
            }
            PolicyKind::LinearFeedback => {
                let cols = self.state_dim + 1;
                for i in 0..m {
                    for (j, &xj) in x.iter().enumerate() {
                        jac[(i, i * cols + j)] = xj;
                    }
                    jac[(i, i * cols + self.state_dim)] = T::one();
                }
            }
        }
        Ok(jac)
    }

    /// `D_xπ_h(x, θ)`, an `m×n` matrix.
    pub fn jacobian_state<T: Float>(&self, h: usize, x: &[T], theta: &[T]) -> Result<Matrix<T>> {
        self.check(h, x.len(), theta.len())?;
        let (m, n) = (self.input_dim, self.state_dim);
        Ok(match self.kind {
            PolicyKind::OpenLoop => Matrix::zeros(m, n),
            PolicyKind::LinearFeedback => {
                let cols = n + 1;
                let data = (0..m)
                    .flat_map(|i| theta[i * cols..i * cols + n].iter().copied())
                    .collect();
                Matrix::from_row_major(m, n, data)
            }
        })
    }

    /// `out += D_θπ_h(x)ᵀ·v` without materialising the Jacobian.
    pub fn accumulate_jacobian_transpose<T: Float>(
        &self,
        h: usize,
        x: &[T],
        v: &[T],
        out: &mut [T],
    ) {
        debug_assert_eq!(v.len(), self.input_dim);
        debug_assert_eq!(out.len(), self.param_dim());
        let m = self.input_dim;
        match self.kind {
            PolicyKind::OpenLoop => {
                for (o, &vi) in out[h * m..(h + 1) * m].iter_mut().zip(v) {
                    *o += vi;
                }
            }
            PolicyKind::LinearFeedback => {
                let cols = self.state_dim + 1;
                for (i, &vi) in v.iter().enumerate() {
                    let row = &mut out[i * cols..(i + 1) * cols];
                    for (o, &xj) in row.iter_mut().zip(x) {
                        *o += xj * vi;
                    }
                    row[self.state_dim] += vi;
                }
            }
        }
    }
}
