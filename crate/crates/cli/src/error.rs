use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Toml(#[from] toml::de::Error),

    #[error("config key `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("{phase}: {source}")]
    Core {
        phase: &'static str,
        #[source]
        source: qflow_core::Error,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serializing the report: {0}")]
    Json(#[from] serde_json::Error),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub(crate) fn config_err<T>(key: &str, message: impl Into<String>) -> CliResult<T> {
    Err(CliError::Config {
        key: key.into(),
        message: message.into(),
    })
}

/// Attaches a phase name to core errors.
pub(crate) trait Phase<T> {
    fn phase(self, phase: &'static str) -> CliResult<T>;
}

impl<T> Phase<T> for qflow_core::Result<T> {
    fn phase(self, phase: &'static str) -> CliResult<T> {
        self.map_err(|source| CliError::Core { phase, source })
    }
}
