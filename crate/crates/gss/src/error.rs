use std::path::{Path, PathBuf};

use gss_core::error::ErrorCategory;
use gss_core::GssError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("cutoff {cutoff} Hz must lie in (0, {nyquist}) Hz")]
    InvalidCutoff { cutoff: f64, nyquist: f64 },
    #[error(transparent)]
    Core(#[from] GssError),
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    /// `ConfigError`, `NumericalError` or `ResonanceError`.
    pub fn category(&self) -> &'static str {
        match self {
            CliError::Core(e) => match e.category() {
                ErrorCategory::Config => "ConfigError",
                ErrorCategory::Numerical => "NumericalError",
                ErrorCategory::Resonance => "ResonanceError",
            },
            _ => "ConfigError",
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "Config",
            CliError::Io { .. } => "Io",
            CliError::InvalidCutoff { .. } => "InvalidCutoff",
            CliError::Core(e) => e.kind(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.category() {
            "NumericalError" => 3,
            "ResonanceError" => 4,
            _ => 2,
        }
    }
}

pub(crate) fn io_error(path: &Path, source: std::io::Error) -> CliError {
    CliError::Io { path: path.to_path_buf(), source }
}

pub(crate) fn config(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}
