//! Skeleton file parsers and the binary tensor container.

mod container;
mod fpha;
mod ntu;
mod sequence;

use thiserror::Error;

pub use container::{
    decode_any_tensor, decode_tensor, encode_tensor, read_any_tensor, read_tensor, write_tensor, AnyTensor,
    ContainerError, DType, DenseTensor, Element, MAGIC, VERSION,
};
pub use fpha::{format_fpha, parse_fpha, FPHA_JOINTS};
pub use ntu::{annotate_from_file_name, format_ntu, parse_ntu, parse_ntu_file_name, NtuFileIds, NTU_JOINTS};
pub use sequence::SkeletonSequence;

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("empty input")]
    Empty,
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("frame {frame}: {message}")]
    Frame { frame: usize, message: String },
    #[error("invalid sequence: {0}")]
    Invalid(String),
    #[error("line {line}: read failed: {source}")]
    Io {
        line: usize,
        #[source]
        source: std::io::Error,
    },
}

impl ParseError {
    pub(crate) fn line(line: usize, message: String) -> Self {
        ParseError::Line { line, message }
    }

    pub(crate) fn frame(frame: usize, message: String) -> Self {
        ParseError::Frame { frame, message }
    }

    pub(crate) fn io(line: usize, source: std::io::Error) -> Self {
        ParseError::Io { line, source }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ParseError::Empty => "empty",
            ParseError::Line { .. } => "line",
            ParseError::Frame { .. } => "frame",
            ParseError::Invalid(_) => "invalid",
            ParseError::Io { .. } => "io",
        }
    }
}
