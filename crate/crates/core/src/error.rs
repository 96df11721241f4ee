use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("alignment error: {0}")]
    Alignment(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("incompatible series: {0}")]
    Incompatible(String),

    #[error("insufficient data: need at least {needed} observations, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("lag {lag} out of range for a series of length {len}")]
    LagOutOfRange { lag: usize, len: usize },

    #[error("model pool too small: {size} model(s), need at least 2")]
    PoolTooSmall { size: usize },

    #[error("pool consistency error: {0}")]
    PoolConsistency(String),

    #[error("normalization error: {0}")]
    Normalization(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unknown model `{0}`")]
    UnknownModel(String),

    #[error("{path}: benchmark `{benchmark}` not found among columns")]
    BenchmarkAbsent { path: PathBuf, benchmark: String },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{path}: duplicate key {key} on lines {first_line} and {second_line}")]
    DuplicateKey {
        path: PathBuf,
        key: String,
        first_line: u64,
        second_line: u64,
    },

    #[error("{0}: empty input")]
    EmptyInput(PathBuf),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 2 for I/O failures, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 2,
            _ => 1,
        }
    }
}
