use thiserror::Error;

/// Errors raised by the solver, the quadrature engine and the oracles.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("point {value} outside the domain [{lo}, {hi}]")]
    OutOfDomain { value: f64, lo: f64, hi: f64 },

    #[error("bracket is non-positive (min bracket {min_bracket:e} at eta = {eta})")]
    BracketNonpositive { eta: f64, min_bracket: f64 },

    #[error("quadrature did not reach tolerance: estimate {estimate:e}, error {error:e}")]
    QuadratureFailure { estimate: f64, error: f64 },

    #[error("alpha = -2/(a+1) is undefined for a = -1")]
    UndefinedAlpha,

    #[error("undecidable: {0}")]
    Undecidable(String),

    #[error("time {t} is at or beyond the blow-up time {t_star}")]
    BeyondBlowup { t: f64, t_star: f64 },

    #[error("time {t} is outside the solved interval [0, {t_end}]")]
    TimeOutOfRange { t: f64, t_end: f64 },

    #[error("snapshot time {snapshot} does not match state time {state}")]
    TimeMismatch { snapshot: f64, state: f64 },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;
