use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("direction numbers, line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("argument outside domain: {0}")]
    Domain(String),

    #[error("factorization failed: {0}")]
    Factorization(String),

    #[error("root search did not converge after {iterations} iterations (last iterate {last})")]
    Convergence { iterations: usize, last: f64 },

    #[error("monotonicity probe failed at sample {index}: {detail}")]
    Monotonicity { index: usize, detail: String },

    #[error("contract violated: {0}")]
    Contract(String),

    #[error("rate fit: {0}")]
    Fit(String),

    #[error("relative error undefined for reference value {0}")]
    ZeroReference(f64),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
