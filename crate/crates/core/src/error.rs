use thiserror::Error;

/// Errors produced by the simulation library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument violated a documented precondition.
    #[error("invalid input: {0}")]
    Domain(String),

    /// A calibration table lookup had no usable entry.
    #[error("no calibration entry for tau = {tau} t_x, angle = {angle} rad")]
    MissingEntry { tau: f64, angle: f64 },

    /// An iterative procedure stopped before meeting its tolerance.
    #[error("{what} did not converge (residual {residual:e})")]
    NoConvergence { what: String, residual: f64 },

    /// The leapfrog step is larger than the stability limit.
    #[error("time step {dt:e} exceeds the stability limit hbar/E_max = {limit:e}")]
    Unstable { dt: f64, limit: f64 },

    /// A persisted artifact could not be parsed.
    #[error("malformed data: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
