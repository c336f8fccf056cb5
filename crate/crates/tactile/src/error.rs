use std::path::PathBuf;

/// Failures surfaced by the file formats and subcommands.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}:{line}: {message}", path.display())]
    Parse { path: PathBuf, line: usize, message: String },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] tactile_core::Error),
    /// The run completed but the outcome contradicts what was expected.
    #[error("{0}")]
    Domain(String),
}

impl CliError {
    /// Process exit code: 2 for parse and configuration errors, 3 for domain failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Domain(_) => 3,
            _ => 2,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        CliError::Json { path: path.into(), source }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
