//! Session engine: the catch state machine, its log, replay, and the
//! runtime that connects it to a bob and an operator UI.

mod core;
mod engine;
mod harness;
mod record;
mod replay;
mod state;
mod ui;

use std::path::{Path, PathBuf};

pub use self::core::*;
pub use engine::*;
pub use harness::*;
pub use record::*;
pub use replay::*;
pub use state::*;
pub use ui::*;

#[derive(Debug, thiserror::Error)]
pub enum SessionError {
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("invalid record: {0}")]
    InvalidRecord(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Net(#[from] std::io::Error),
    #[error(transparent)]
    Proto(#[from] crate::bobproto::ProtoError),
    #[error(transparent)]
    Vision(#[from] crate::vision::VisionError),
    #[error(transparent)]
    Image(#[from] crate::augment::AugmentError),
    #[error("{0}")]
    Runtime(String),
}

impl SessionError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        SessionError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}
