use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid container: {0}")]
    InvalidContainer(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("size mismatch: expected {expected} samples, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("inner parallel set at distance {distance} has empty interior (inradius {inradius})")]
    EmptyInterior { distance: f64, inradius: f64 },

    #[error("support samples are not convex (min residual {min_residual:.3e} < -{tolerance:.3e})")]
    NotConvex { min_residual: f64, tolerance: f64 },

    #[error("degenerate polygon chain: {0}")]
    Degenerate(String),

    #[error("exponent p = inf is only supported by the minimax solver")]
    InfiniteExponent,

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
