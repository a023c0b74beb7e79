use std::path::{Path, PathBuf};

/// Failure of a command, carrying enough context for a one-line diagnostic.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config {path}: {message}")]
    Config { path: PathBuf, message: String },
    #[error("{path}: {message}")]
    Input { path: PathBuf, message: String },
    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: reprmetric::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("verification failed: {0}")]
    Verify(String),
}

impl CliError {
    pub fn config(path: &Path, message: impl Into<String>) -> Self {
        CliError::Config {
            path: path.to_path_buf(),
            message: message.into(),
        }
    }

    pub fn input(path: &Path, message: impl Into<String>) -> Self {
        CliError::Input {
            path: path.to_path_buf(),
            message: message.into(),
        }
    }

    pub fn core(context: impl Into<String>, source: reprmetric::Error) -> Self {
        CliError::Core {
            context: context.into(),
            source,
        }
    }

    /// 1: configuration or input; 2: linearly dependent items; 3: numerical
    /// failure; 4: a verification check failed.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Input { .. } | CliError::Write { .. } => 1,
            CliError::Core { source, .. } => match source {
                reprmetric::Error::LinearDependence { .. } => 2,
                reprmetric::Error::NonFinite { .. } | reprmetric::Error::Numerical(_) => 3,
                _ => 1,
            },
            CliError::Verify(_) => 4,
        }
    }
}
