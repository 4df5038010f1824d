use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("initial shape does not fit in a torus of side {side}: {detail}")]
    ShapeTooLarge { side: f64, detail: String },

    #[error("quadrature did not converge at w={w}, z={z} (error estimate {estimate:e})")]
    Quadrature { w: f64, z: f64, estimate: f64 },

    #[error("profile has no 1/2 crossing")]
    NoCrossing,

    #[error("geometry mismatch: expected {expected}")]
    Geometry { expected: &'static str },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("missing column `{0}`")]
    MissingColumn(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Quadrature { .. } | Error::NoCrossing)
    }
}
