use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("non-finite sample at flat index {index}")]
    NonFinite { index: usize },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("divergence constraint violated for {what}: max |div| = {max:.3e} exceeds {tol:.3e}")]
    Divergence { what: &'static str, max: f64, tol: f64 },

    #[error("CFL guard tripped: Courant number {courant:.4} exceeds {limit}")]
    Cfl { courant: f64, limit: f64 },

    #[error("time step must be positive, got {0}")]
    InvalidTimeStep(f64),

    #[error("driver series ends at t = {available}, horizon {requested} requested")]
    SeriesTooShort { available: f64, requested: f64 },

    #[error("estimate has zero right-hand side but nonzero left-hand side {lhs:.3e}")]
    DegenerateEstimate { lhs: f64 },

    #[error("norm of the reference field is zero")]
    ZeroNorm,

    #[error("unknown lemma id `{given}`; known ids: {known}")]
    UnknownLemma { given: String, known: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("{0}")]
    Format(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        Error::Json {
            path: path.into(),
            source,
        }
    }
}
