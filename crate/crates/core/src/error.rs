use thiserror::Error;

/// Errors raised by model construction, numerical routines and oracles.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("regime assumption {clause} violated: {detail}")]
    Assumption {
        clause: &'static str,
        detail: String,
    },

    #[error("exponential moment overflow at s = {s}")]
    Overflow { s: f64 },

    #[error("enumeration budget of {budget} paths exceeded")]
    Budget { budget: u64 },

    #[error("quadrature did not converge on [{a}, {b}]: estimate {estimate}, error {error}")]
    Quadrature {
        a: f64,
        b: f64,
        estimate: f64,
        error: f64,
    },

    #[error("insufficient n_effective: {n_effective:.2} < {required}")]
    InsufficientSamples { n_effective: f64, required: f64 },

    #[error("mass accounting failed: large_jump = {large_jump}, drift_in = {drift_in}, atom = {atom}, total = {total}")]
    MassAccounting {
        large_jump: f64,
        drift_in: f64,
        atom: f64,
        total: f64,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
