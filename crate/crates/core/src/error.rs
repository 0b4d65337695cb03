use std::path::PathBuf;

use crate::costs::LpFit;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got} ({context})")]
    DimensionMismatch {
        expected: usize,
        got: usize,
        context: &'static str,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The state became non-finite, or energy kept rising after every allowed step halving.
    #[error("solver diverged at t/tau = {t_over_tau} with step size {eta}")]
    Divergence { eta: f64, t_over_tau: f64 },

    #[error("l^p fit did not converge within budget (best c = {}, s = {})", best.c, best.s)]
    FitNotConverged { best: LpFit },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
