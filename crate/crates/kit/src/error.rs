use std::path::{Path, PathBuf};

use thiserror::Error;

/// Every failure the tool reports. IO problems exit with 2, the rest with 1.
#[derive(Debug, Error)]
pub enum KitError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {message}", path.display())]
    InvalidFile { path: PathBuf, message: String },
    #[error("{0}")]
    Invalid(String),
}

impl KitError {
    pub fn exit_code(&self) -> i32 {
        match self {
            KitError::Io { .. } => 2,
            _ => 1,
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        KitError::Io { path: path.to_path_buf(), source }
    }

    pub fn file(path: &Path, message: impl std::fmt::Display) -> Self {
        KitError::InvalidFile { path: path.to_path_buf(), message: message.to_string() }
    }

    pub fn invalid(message: impl std::fmt::Display) -> Self {
        KitError::Invalid(message.to_string())
    }
}

/// Maps a `csv` error onto IO or content failure for `path`.
pub fn from_csv(path: &Path, e: csv::Error) -> KitError {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => KitError::io(path, io),
            other => KitError::file(path, format!("{other:?}")),
        }
    } else {
        KitError::file(path, e)
    }
}

pub fn from_pose(path: &Path, e: crate::posefile::PoseLogError) -> KitError {
    match e {
        crate::posefile::PoseLogError::Io(io) => KitError::io(path, io),
        other => KitError::file(path, other),
    }
}

pub type Result<T, E = KitError> = std::result::Result<T, E>;
