use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("session too short: {samples} samples, need at least {window}")]
    SessionTooShort { samples: usize, window: usize },

    #[error("empty series")]
    EmptySeries,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("sample rate mismatch: expected {expected} Hz, got {actual} Hz")]
    SampleRateMismatch { expected: u32, actual: u32 },

    #[error("undefined normalization: both series are all-zero")]
    UndefinedNormalization,

    #[error("zero-norm embedding")]
    ZeroNorm,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("kernel {kernel} failed on pair ({left}, {right}): {source}")]
    Pair {
        kernel: String,
        left: String,
        right: String,
        #[source]
        source: Box<Error>,
    },

    #[error("{}: {message}", location(path, *line))]
    Parse {
        path: PathBuf,
        line: Option<u64>,
        message: String,
    },

    #[error("schema mismatch in {path}: expected `{expected}`, found `{found}`")]
    Schema {
        path: PathBuf,
        expected: String,
        found: String,
    },

    #[error("undefined rate: {0} has a zero denominator")]
    UndefinedRate(&'static str),

    #[error("user {user}: {message}")]
    InsufficientSessions { user: String, message: String },

    #[error("missing face embedding for session {0}")]
    MissingEmbedding(String),

    #[error("{failed} of {total} inputs failed:\n  {}", messages.join("\n  "))]
    Batch {
        failed: usize,
        total: usize,
        messages: Vec<String>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Wav {
        path: PathBuf,
        #[source]
        source: hound::Error,
    },
}

fn location(path: &std::path::Path, line: Option<u64>) -> String {
    match line {
        Some(line) => format!("{}:{}", path.display(), line),
        None => path.display().to_string(),
    }
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub fn parse(path: &std::path::Path, line: Option<u64>, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.to_path_buf(),
            line,
            message: msg.into(),
        }
    }

    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
