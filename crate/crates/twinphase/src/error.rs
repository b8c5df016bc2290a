//! Error type shared by all modules.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Two maps that must live on the same grid do not.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// A parameter is outside its documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Propagation distance exceeds the transfer-function sampling bound.
    /// Propagating further would alias the quadratic kernel phase across
    /// the padded grid.
    #[error(
        "defocus {dz_um} um exceeds the aliasing bound for this grid; \
         maximum safe |dz| is {max_dz_um:.1} um"
    )]
    AliasingBound { dz_um: f64, max_dz_um: f64 },

    /// A statistic that requires spread was fed constant data.
    #[error("zero variance: {0}")]
    ZeroVariance(String),

    /// A region of interest does not fit the grid it indexes.
    #[error("roi out of bounds: {0}")]
    RoiOutOfBounds(String),

    /// An ensemble operation was handed no samples.
    #[error("empty ensemble: {0}")]
    EmptyEnsemble(String),

    /// Configuration file could not be read or failed validation.
    #[error("config error: {0}")]
    Config(String),

    /// Malformed image or table file.
    #[error("format error in {path}: {reason}")]
    Format { path: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the CLI: 2 for configuration problems,
    /// 3 for numeric-domain problems, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Format { .. } | Error::InvalidParameter(_) => 2,
            Error::AliasingBound { .. } | Error::ZeroVariance(_) => 3,
            _ => 1,
        }
    }
}
