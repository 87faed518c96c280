use thiserror::Error;

/// Errors produced by the solvers, policies and simulators.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("state space of {states} entries exceeds the configured cap of {cap}")]
    ResourceCap { states: u64, cap: u64 },

    #[error(
        "gap cap {gap_cap} gives a truncation bound of {bound:e} above tol {tol:e}; \
         use a gap cap of at least {required}"
    )]
    GapCapTooSmall {
        gap_cap: u32,
        required: u32,
        bound: f64,
        tol: f64,
    },

    #[error("export failed: {0}")]
    Export(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Export(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Export(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Export(e.to_string())
    }
}
