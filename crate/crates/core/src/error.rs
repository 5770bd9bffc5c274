use thiserror::Error;

/// Errors raised by rollouts, estimators and analysis routines.
///
/// Gradients are carried as `f64` so the error type is independent of the
/// working precision.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("index {index} out of range 0..{len}")]
    Index { index: usize, len: usize },

    #[error("rollout diverged at step {step}")]
    Diverged { step: usize },

    #[error("rollout of sample {sample} diverged at step {step}")]
    SampleDiverged { sample: usize, step: usize },

    /// The rollout touched a measure-zero set where a derivative is undefined.
    /// `value` and `gradient` are what the environment's branch rule produces.
    #[error("derivative undefined at step {step}; branch-rule gradient attached")]
    UndefinedGradient {
        step: usize,
        value: f64,
        gradient: Vec<f64>,
    },

    #[error("more than {limit} impacts within one step at step {step}")]
    SubstepOverflow { step: usize, limit: usize },

    #[error("both empirical variances are zero")]
    DegenerateVariance,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn dimension(what: &'static str, expected: usize, got: usize) -> Self {
        Error::Dimension {
            what,
            expected,
            got,
        }
    }

    /// True for numeric blow-ups (as opposed to configuration mistakes).
    pub fn is_divergence(&self) -> bool {
        matches!(
            self,
            Error::Diverged { .. } | Error::SampleDiverged { .. } | Error::SubstepOverflow { .. }
        )
    }
}
