use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::skeleton_io::{ContainerError, ParseError};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Container(#[from] ContainerError),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("training failed: {0}")]
    Training(String),
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("{}: {source}", path.display())]
    File { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    ParseFile { path: PathBuf, source: ParseError },
}

impl Error {
    pub fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Error::File { path: path.to_path_buf(), source }
    }

    pub fn parse_file(path: &Path, source: ParseError) -> Self {
        Error::ParseFile { path: path.to_path_buf(), source }
    }
}
