use serde::Serialize;

use nmwalk::ErrorClass;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Engine(#[from] nmwalk::Error),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Machine-readable error record written to stderr.
#[derive(Debug, Serialize)]
pub struct ErrorRecord {
    pub kind: String,
    pub class: &'static str,
    pub exit_code: u8,
    pub message: String,
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 2,
            CliError::Engine(e) => match e.class() {
                ErrorClass::Config => 2,
                ErrorClass::Budget => 3,
                ErrorClass::Degenerate => 4,
            },
            CliError::Io { .. } => 1,
        }
    }

    pub fn record(&self) -> ErrorRecord {
        let (kind, class) = match self {
            CliError::Usage(_) => ("usage".to_string(), "config"),
            CliError::Config(_) => ("config".to_string(), "config"),
            CliError::Engine(e) => (
                e.kind().to_string(),
                match e.class() {
                    ErrorClass::Config => "config",
                    ErrorClass::Budget => "budget",
                    ErrorClass::Degenerate => "degenerate",
                },
            ),
            CliError::Io { .. } => ("io".to_string(), "io"),
        };
        ErrorRecord {
            kind,
            class,
            exit_code: self.exit_code(),
            message: self.to_string(),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
