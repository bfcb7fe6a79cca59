use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid torus parameters: {0}")]
    InvalidSpec(String),
    #[error("vertex count overflows the index range")]
    TooLarge,
    #[error("axis {axis} out of range 1..={d}")]
    AxisOutOfRange { axis: usize, d: usize },
    #[error("coordinate out of range: {0}")]
    CoordinateOutOfRange(String),
    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension {0} is too small; at least 2 axes are required")]
    DimensionTooSmall(usize),
    #[error("iteration did not converge after {iterations} steps (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("lambda {lambda} is not supercritical (critical value {lambda_c})")]
    NotSupercritical { lambda: f64, lambda_c: f64 },
    #[error("lambda {lambda} is not subcritical (critical value {lambda_c})")]
    NotSubcritical { lambda: f64, lambda_c: f64 },
    #[error("walk is extinct; no active individual to retire")]
    DeadWalk,
    #[error("malformed occupancy dump: {0}")]
    Format(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
