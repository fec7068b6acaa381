use std::fmt;
use std::path::PathBuf;

use mbm_core::MbmError;

/// Exit status for configuration problems (bad file, unknown preset, bad flag value).
pub const EXIT_CONFIG: u8 = 2;
/// Exit status for failures while simulating or writing output.
pub const EXIT_RUNTIME: u8 = 1;

/// A problem in an experiment description, with the 1-based line it points at when known.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    pub fn new(message: impl Into<String>) -> Self {
        Self {
            line: None,
            message: message.into(),
        }
    }

    pub fn at(line: usize, message: impl Into<String>) -> Self {
        Self {
            line: Some(line),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{origin}: {error}")]
    Config { origin: String, error: ConfigError },
    #[error("unknown preset or missing file `{0}` (see `mbm list-presets`)")]
    UnknownTarget(String),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] MbmError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("csv: {0}")]
    CsvFormat(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config { .. } | CliError::UnknownTarget(_) | CliError::Usage(_) => {
                EXIT_CONFIG
            }
            _ => EXIT_RUNTIME,
        }
    }
}
