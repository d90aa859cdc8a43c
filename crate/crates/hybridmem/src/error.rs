use std::path::PathBuf;

use thiserror::Error;

/// Everything the runner can fail with, grouped by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unknown {what} `{name}`{}", suggestion_suffix(.suggestion))]
    Unknown {
        what: &'static str,
        name: String,
        suggestion: Option<String>,
    },
    #[error("{key}: {message}")]
    Value { key: String, message: String },
    #[error("{0}")]
    Config(String),
    #[error("invalid model parameters: {0}")]
    Model(#[source] hybridmem_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("numerical diagnostics failed in {cell}: {message}")]
    Breach { cell: String, message: String },
}

fn suggestion_suffix(s: &Option<String>) -> String {
    match s {
        Some(s) => format!(" (did you mean `{s}`?)"),
        None => String::new(),
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Breach { .. } => 3,
            _ => 2,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// Maps a core error raised while simulating `cell`.
    pub fn from_core(cell: impl Into<String>, e: hybridmem_core::Error) -> Self {
        match e {
            hybridmem_core::Error::DiagnosticBreach { .. } => CliError::Breach {
                cell: cell.into(),
                message: e.to_string(),
            },
            e => CliError::Model(e),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
