use std::path::PathBuf;

use thiserror::Error;

use crate::document::DocumentError;
use crate::syntax::ParseError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Parse { path: PathBuf, source: ParseError },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: malformed proof document: {message}", path.display())]
    Json { path: PathBuf, message: String },
    #[error("{}: {source}", path.display())]
    Document { path: PathBuf, source: DocumentError },
    #[error(transparent)]
    Core(#[from] relat_core::Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// Location for parse errors, as `(file, line, column)`.
    pub fn location(&self) -> Option<(String, usize, usize)> {
        match self {
            CliError::Parse { path, source } => Some((path.display().to_string(), source.line, source.column)),
            _ => None,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
