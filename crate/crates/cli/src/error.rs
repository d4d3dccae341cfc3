use std::process::ExitCode;

use serde_json::json;

/// Failure classes with distinct process exit codes.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("integration failed: {0}")]
    Integration(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Integration(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Validation(_) => "validation",
            CliError::Integration(_) => "integration",
            CliError::Io(_) => "io",
        }
    }

    /// One-line JSON diagnostic.
    pub fn diagnostic(&self) -> String {
        let msg = match self {
            CliError::Validation(m) | CliError::Integration(m) | CliError::Io(m) => m,
        };
        json!({ "error": self.kind(), "exit_code": self.exit_code(), "message": msg }).to_string()
    }

    pub fn report(&self) -> ExitCode {
        eprintln!("{}", self.diagnostic());
        ExitCode::from(self.exit_code())
    }
}

impl From<phonon_core::Error> for CliError {
    fn from(e: phonon_core::Error) -> Self {
        use phonon_core::Error as E;
        match e {
            E::IntegrationFailure { .. } | E::Diagnostics { .. } | E::Realization { .. } | E::Internal(_) => {
                CliError::Integration(e.to_string())
            }
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
