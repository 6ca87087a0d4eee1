use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InputDomain(String),

    #[error("color and depth images are not aligned: color {color:?}, depth {depth:?}")]
    Alignment {
        color: (usize, usize),
        depth: (usize, usize),
    },

    #[error("unsupported image format in {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{what} has {size} vertices, above the dense oracle cap of {cap}; downsample first")]
    Capacity {
        what: &'static str,
        size: usize,
        cap: usize,
    },

    #[error("polynomial fit underdetermined: {points} grid points for degree {degree}")]
    UnderdeterminedFit { points: usize, degree: usize },

    #[error("ill-conditioned fit: {0}")]
    Conditioning(String),

    #[error("non-finite value during filtering at step {step}; lambda scale is stale or coefficients overflow")]
    NumericalOverflow { step: usize },

    #[error("energy ratio undefined for an all-zero signal")]
    UndefinedRatio,

    #[error("eigenvalue iteration did not converge")]
    NoConvergence,

    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    /// Short machine-readable category, used by the CLI for exit codes and summaries.
    pub fn category(&self) -> &'static str {
        match self {
            Error::InputDomain(_) => "input",
            Error::Alignment { .. } => "alignment",
            Error::Format { .. } => "format",
            Error::Io { .. } => "file",
            Error::Capacity { .. } => "capacity",
            Error::UnderdeterminedFit { .. }
            | Error::Conditioning(_)
            | Error::NumericalOverflow { .. }
            | Error::UndefinedRatio
            | Error::NoConvergence => "numeric",
            Error::Config(_) => "config",
        }
    }

    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::InputDomain(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
