use std::path::PathBuf;

use crate::spectral::Rep;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("representation mismatch: expected {expected:?}, found {found:?}")]
    RepMismatch { expected: Rep, found: Rep },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("inadmissible parameters: {0}")]
    Inadmissible(String),
    #[error("not enough samples: {0}")]
    InsufficientSamples(String),
    #[error("amplitude blowup at t = {t}: {detail}")]
    Blowup { t: f64, detail: String },
    #[error("norm drift {drift:e} at t = {t} exceeds tolerance")]
    Instability { t: f64, drift: f64 },
    #[error("wrap-around reached the box edge at t = {t}")]
    WrapAround { t: f64 },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("malformed checkpoint: {0}")]
    Checkpoint(String),
    #[error("manifest: {0}")]
    Manifest(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
