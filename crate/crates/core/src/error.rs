use thiserror::Error;

use crate::gf::FieldSpec;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Bad parameters or malformed input.
    #[error("usage error: {0}")]
    Usage(String),

    /// Mathematically undefined request (inverse of zero, single-user bound).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("field mismatch: expected {expected}, found {found}")]
    FieldMismatch { expected: FieldSpec, found: FieldSpec },

    /// Randomized construction ran out of resamples.
    #[error("construction failed after {attempts} attempts: {detail}")]
    Construction { attempts: u32, detail: String },

    /// Exhaustive search refused because its size exceeds the ceiling.
    #[error("search size {size:.3e} exceeds ceiling {ceiling:.3e}")]
    SearchTooLarge { size: f64, ceiling: f64 },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }
}
