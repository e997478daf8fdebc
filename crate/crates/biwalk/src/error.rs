use std::path::{Path, PathBuf};

use biwalk_core::Error as CoreError;

/// Process exit codes.
///
/// | code | meaning |
/// |------|---------|
/// | 0 | success |
/// | 2 | bad arguments, including an empty or malformed z grid |
/// | 3 | config file could not be parsed or describes an invalid model |
/// | 4 | numerical failure during a run |
/// | 5 | file could not be read or written |
/// | 6 | `validate` found at least one failing check |
pub mod exit {
    pub const USAGE: u8 = 2;
    pub const CONFIG: u8 = 3;
    pub const NUMERICAL: u8 = 4;
    pub const IO: u8 = 5;
    pub const VALIDATION: u8 = 6;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),

    #[error("config: {0}")]
    Config(String),

    #[error("numerical failure: {0}")]
    Numerical(CoreError),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{failed} validation check(s) failed")]
    Validation { failed: usize },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Errors raised while building model types from a config file.
    pub fn invalid_config(e: CoreError) -> Self {
        match e {
            CoreError::InvalidGrid(_) => CliError::Usage(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }

    /// Errors raised by a simulation run.
    pub fn from_core(e: CoreError) -> Self {
        match e {
            CoreError::InvalidGrid(_) => CliError::Usage(e.to_string()),
            CoreError::EmptyArray
            | CoreError::DimensionMismatch { .. }
            | CoreError::NonPositiveCoupling { .. }
            | CoreError::NonFinite(_)
            | CoreError::InvalidPump(_)
            | CoreError::InvalidDisorder(_) => CliError::Config(e.to_string()),
            other => CliError::Numerical(other),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Config(_) => exit::CONFIG,
            CliError::Numerical(_) => exit::NUMERICAL,
            CliError::Io { .. } => exit::IO,
            CliError::Validation { .. } => exit::VALIDATION,
        }
    }
}
