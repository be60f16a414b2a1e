use std::path::{Path, PathBuf};

pub type Result<T, E = PodsumError> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum PodsumError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed JSON document; `offset` is a byte offset into the file.
    #[error("{path}: parse error at byte {offset}: {message}")]
    Parse {
        path: PathBuf,
        offset: usize,
        message: String,
    },

    /// Malformed JSONL record; `line` is 1-based.
    #[error("{path}:{line}: {message}")]
    Record {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{0}")]
    Invalid(String),

    #[error(transparent)]
    Core(#[from] podsum_core::Error),

    #[error("transport error talking to {url}: {message}")]
    Transport { url: String, message: String },

    #[error("model server at {url} answered {status}: {message}")]
    Protocol {
        url: String,
        status: u16,
        message: String,
    },
}

impl PodsumError {
    pub fn io(path: impl AsRef<Path>, source: std::io::Error) -> Self {
        PodsumError::Io {
            path: path.as_ref().to_path_buf(),
            source,
        }
    }

    pub fn invalid(message: impl Into<String>) -> Self {
        PodsumError::Invalid(message.into())
    }

    /// 2 for I/O and transport failures, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            PodsumError::Io { .. } | PodsumError::Transport { .. } => 2,
            _ => 1,
        }
    }
}
