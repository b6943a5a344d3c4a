use std::path::PathBuf;

/// Errors raised by the IO layer and the command-line driver.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}:{line}: {message}", path.display())]
    Parse { path: PathBuf, line: usize, message: String },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] sparse_lsq_core::Error),
    #[error("writing {}: {source}", path.display())]
    Output { path: PathBuf, source: std::io::Error },
    #[error("serializing report: {0}")]
    Serialize(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(path: &std::path::Path, line: usize, message: impl Into<String>) -> Self {
        Error::Parse { path: path.to_path_buf(), line, message: message.into() }
    }

    /// Process exit code: 2 for bad input, 1 for internal failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } | Error::Parse { .. } | Error::Usage(_) => 2,
            Error::Core(e) if e.is_input_error() => 2,
            Error::Core(_) | Error::Output { .. } | Error::Serialize(_) => 1,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
