use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("bad magic: expected {expected:?}, found {found:?}")]
    BadMagic { expected: [u8; 4], found: [u8; 4] },
    #[error("truncated file: {0}")]
    Truncated(String),
    #[error("unsupported format version {found} (expected {expected})")]
    VersionMismatch { expected: u32, found: u32 },
    #[error("shape mismatch on {axis}: expected {expected}, found {found}")]
    ShapeMismatch {
        axis: String,
        expected: usize,
        found: usize,
    },
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("scene part {part} leaves the unit bounding sphere at t={time:.4}s (radius {radius:.4})")]
    OutOfBounds { part: String, time: f64, radius: f64 },
    #[error("malformed data: {0}")]
    Malformed(String),
    #[error("image codec: {0}")]
    Image(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn shape(axis: impl Into<String>, expected: usize, found: usize) -> Self {
        Error::ShapeMismatch {
            axis: axis.into(),
            expected,
            found,
        }
    }
}
