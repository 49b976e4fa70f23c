use thiserror::Error;

/// Errors raised by the channel model, the optimizers and the harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("antenna position coincides with path anchor {anchor} (distance {distance:e} m)")]
    ZeroDistance { anchor: usize, distance: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("channel Gram matrix is ill-conditioned (rcond = {rcond:e}); zero-forcing is invalid")]
    IllConditionedChannel { rcond: f64 },

    #[error("user {user} has a zero path response (||b||_1 = 0)")]
    ZeroChannel { user: usize },

    #[error("user {user} receives zero beamforming gain (|h^H w| = 0)")]
    ZeroGain { user: usize },

    #[error("grid spacing {spacing} m is below the minimum spacing {d_min} m")]
    InfeasibleSpacing { spacing: f64, d_min: f64 },

    #[error("array shape: {0}")]
    BadShape(String),

    #[error("invalid value: {0}")]
    InvalidInput(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("no feasible antenna placement: {0}")]
    Infeasible(String),

    #[error("bad user distribution parameters: {0}")]
    BadDistributionParams(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
