use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("invalid config value `{key}`{}: {message}", line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    Config { line: Option<usize>, key: String, message: String },
    #[error("unknown preset `{0}` (available: fig2 to fig7)")]
    UnknownPreset(String),
    #[error("{0}")]
    Usage(String),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("solver error: {0}")]
    Solver(#[from] bstirap_core::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}
