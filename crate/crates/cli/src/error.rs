use std::path::PathBuf;

use thiserror::Error;

/// Failures of a command, each mapped to a distinct exit status.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("config: {0}")]
    Config(String),

    #[error("blow-up: {0}")]
    BlowUp(String),

    #[error("budget violation: {0}")]
    Budget(String),

    #[error("estimate suite failed: {0}")]
    Estimate(String),

    #[error(transparent)]
    Numerical(gkdv_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Config(_) => 2,
            CliError::BlowUp(_) => 3,
            CliError::Budget(_) => 4,
            CliError::Estimate(_) => 5,
            CliError::Numerical(_) => 6,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<gkdv_core::Error> for CliError {
    fn from(e: gkdv_core::Error) -> Self {
        use gkdv_core::Error as E;
        match e {
            E::Config(m) => CliError::Config(m),
            E::BlowUp { .. } => CliError::BlowUp(e.to_string()),
            E::BudgetViolation { .. } => CliError::Budget(e.to_string()),
            other => CliError::Numerical(other),
        }
    }
}
