use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {message}")]
    InvalidParameter { name: &'static str, message: String },

    #[error("root bracketing failed: {0}")]
    Bracketing(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("level check failed: {0}")]
    LevelCount(String),

    #[error(
        "integration step size underflow at t = {time:.6e} s; \
         stiffness ratio (fastest rate x remaining span) = {ratio:.3e}"
    )]
    StepSizeUnderflow { time: f64, ratio: f64 },

    #[error("rate ordering violated: {0}")]
    RateOrdering(String),

    #[error("invalid state: {0}")]
    InvalidState(String),
}

pub type Result<T> = std::result::Result<T, Error>;
