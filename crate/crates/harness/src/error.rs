use std::io;
use std::path::PathBuf;

use refattn_core::TensorError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: format error: {message}")]
    Format { path: PathBuf, message: String },
    #[error("{path}: invalid attention: {source}")]
    Tensor { path: PathBuf, source: TensorError },
    #[error("{path}:{line}: {source}")]
    Record { path: PathBuf, line: usize, source: refattn_core::Error },
    #[error("{0}")]
    Mismatch(String),
    #[error(transparent)]
    Core(#[from] refattn_core::Error),
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(io::Error) -> HarnessError {
    let path = path.into();
    move |source| HarnessError::Io { path, source }
}
