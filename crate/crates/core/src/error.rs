use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside the domain of the operation (e.g. a nonpositive `lambda`).
    #[error("domain error: {0}")]
    Domain(String),

    /// A tabulated object was asked for a value outside its grid.
    #[error("extrapolation outside tabulated range [{lo:e}, {hi:e}] at {at:e}")]
    Extrapolation { lo: f64, hi: f64, at: f64 },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    /// Adaptive quadrature stopped before reaching its target tolerance.
    #[error("quadrature did not converge: estimated error {achieved:e} > target {target:e} ({context})")]
    Quadrature {
        achieved: f64,
        target: f64,
        context: String,
    },

    #[error("schedule error: {0}")]
    Schedule(String),

    #[error("Laplace inversion unstable at r = {at:e}: {diagnostic}")]
    Inversion { at: f64, diagnostic: String },

    #[error("sampler error: {0}")]
    Sampler(String),

    /// A path exhausted its step budget before leaving the domain.
    #[error("path censored after {steps} steps")]
    Censored { steps: usize },

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
