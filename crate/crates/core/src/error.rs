use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dimension mismatch: expected a vector of length {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("{what} = {got} exceeds the guard limit {limit}")]
    Guard {
        what: &'static str,
        limit: usize,
        got: usize,
    },

    #[error("outside the formula's domain: {0}")]
    Domain(String),

    #[error(
        "lattice truncation insufficient: tail bound {tail:e} exceeds tolerance {tolerance:e}"
    )]
    TailBound { tail: f64, tolerance: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
