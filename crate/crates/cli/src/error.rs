//! Errors surfaced by the front end, each attributable to a module and operation.

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("unknown configuration keys: {}", .0.join(", "))]
    UnknownKeys(Vec<String>),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{source}")]
    Module {
        module: &'static str,
        operation: &'static str,
        source: supsob::Error,
    },
}

impl CliError {
    /// `(module, operation)` the failure is attributed to.
    pub fn origin(&self) -> (&'static str, &'static str) {
        match self {
            Self::UnknownKeys(_) | Self::Config(_) => ("cli", "parse_config"),
            Self::Io { .. } => ("cli", "io"),
            Self::Module {
                module, operation, ..
            } => (module, operation),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Attach the module and operation to a library error.
pub trait Context<T> {
    fn ctx(self, module: &'static str, operation: &'static str) -> CliResult<T>;
}

impl<T> Context<T> for supsob::Result<T> {
    fn ctx(self, module: &'static str, operation: &'static str) -> CliResult<T> {
        self.map_err(|source| CliError::Module {
            module,
            operation,
            source,
        })
    }
}
