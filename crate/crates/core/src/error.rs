//! Error type shared across the solver stack.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Array extents do not match what the operation expects.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// Invalid run or grid configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// The electroneutrality denominator 1 - H_T(k) fell below the safe floor.
    #[error("singular electroneutrality multiplier at k = ({0}, {1}): 1 - H_T = {2:e}")]
    SingularMultiplier(i64, i64, f64),

    /// Generic numerical failure (e.g. a linear solve broke down).
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Proposed time step exceeds the advective stability limit.
    #[error("time step {dt:e} rejected: exceeds CFL limit {limit:e}")]
    StepRejected { dt: f64, limit: f64 },

    /// Non-finite values appeared in the state.
    #[error("solution blow-up: non-finite values at t = {t}")]
    BlowUp { t: f64 },

    /// A runtime inequality monitor failed beyond its tolerance.
    #[error("monitor violation: {0}")]
    Monitor(String),

    /// Malformed snapshot or auxiliary file.
    #[error("format error: {0}")]
    Format(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
