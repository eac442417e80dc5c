use thiserror::Error;

/// Errors raised by the signal model, solver front-ends, detectors and
/// experiment harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("spectrum is not positive: minimum {min:.3e} at omega = {omega:.4}")]
    Spectrum { min: f64, omega: f64 },

    #[error("spectral factorization failed: {reason} (root modulus {modulus:.12})")]
    Factorization { reason: String, modulus: f64 },

    #[error("model error: {0}")]
    Model(String),

    #[error("search space of {size} candidates exceeds the limit of {limit}")]
    SearchSpace { size: f64, limit: f64 },

    #[error("matrix is ill-conditioned (condition number {0:.3e})")]
    Conditioning(f64),

    #[error("solver failed: {0}")]
    Solver(String),
}

pub type Result<T> = std::result::Result<T, Error>;
