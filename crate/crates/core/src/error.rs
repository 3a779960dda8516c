use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Image bytes could not be decoded; `offset` is the byte position where decoding stopped.
    #[error("{origin}: malformed image at byte {offset}: {reason}")]
    Decode {
        origin: String,
        offset: u64,
        reason: String,
    },

    #[error("{origin}: could not encode image: {reason}")]
    Encode { origin: String, reason: String },

    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("click {index} at ({x}, {y}) lies outside the {width}x{height} image")]
    ClickOutOfBounds {
        index: usize,
        x: u32,
        y: u32,
        width: usize,
        height: usize,
    },

    #[error("unknown image id `{0}`")]
    UnknownImage(String),

    #[error("no quality score for worker `{0}`")]
    MissingQuality(String),

    #[error("{origin}: line {line}: {reason}")]
    Csv {
        origin: String,
        line: u64,
        reason: String,
    },

    #[error("empty dataset: {0}")]
    EmptyDataset(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
