use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point outside the domain of the metric: t^2 |x|^2 = {0} >= 1")]
    MetricDomain(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("integration failed at s = {s}: {reason}")]
    Integration { s: f64, rho: f64, drho: f64, reason: String },

    #[error("profile does not leave the unit ball")]
    NoExit,

    #[error("newton iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64, path: Vec<f64> },

    #[error("grid too coarse: {got} points, need at least {min}")]
    Resolution { got: usize, min: usize },

    #[error("discretization failure: {0}")]
    Discretization(String),

    #[error("unknown manifold tag `{0}`")]
    UnknownManifold(String),

    #[error("missing spectral report for {0}")]
    MissingReport(String),

    #[error("morse trials disagree: {0:?}")]
    MorseDisagreement(Vec<i64>),

    #[error("morse trial budget exhausted after {0} degenerate samples")]
    DegenerateTrials(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
