//! Error plumbing: every failure maps to a distinct exit code and a
//! machine-readable record on the output stream.

use lculab_core::CoreError;
use serde::Serialize;

#[derive(Debug)]
pub enum CliError {
    /// Invalid flag combination or value. Exit code 2.
    Config(String),
    /// Unreadable or malformed input vector file. Exit code 3.
    InputParse { path: String, line: usize, position: usize, message: String },
    /// Output stream failure. Exit code 4.
    Io(String),
    /// Domain error propagated from the library. Exit codes 10-25.
    Core(CoreError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::InputParse { .. } => 3,
            CliError::Io(_) => 4,
            CliError::Core(e) => e.code(),
        }
    }

    pub fn kind(&self) -> &str {
        match self {
            CliError::Config(_) => "ConfigError",
            CliError::InputParse { .. } => "InputParseError",
            CliError::Io(_) => "IoError",
            CliError::Core(e) => e.kind(),
        }
    }

    pub fn message(&self) -> String {
        match self {
            CliError::Config(m) | CliError::Io(m) => m.clone(),
            CliError::InputParse { path, message, .. } => format!("{path}: {message}"),
            CliError::Core(e) => e.to_string(),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::Core(e)
    }
}

/// Emitted as the sole output line when a command fails. Always JSON,
/// regardless of the requested format.
#[derive(Serialize)]
struct ErrorRecord<'a> {
    command: &'a str,
    version: &'a str,
    seed: u64,
    error: &'a str,
    code: i32,
    message: String,
    line: Option<usize>,
    position: Option<usize>,
}

pub fn error_record(err: &CliError, command: &str, seed: u64) -> String {
    let (line, position) = match err {
        CliError::InputParse { line, position, .. } => (Some(*line), Some(*position)),
        _ => (None, None),
    };
    let record = ErrorRecord {
        command,
        version: env!("CARGO_PKG_VERSION"),
        seed,
        error: err.kind(),
        code: err.exit_code(),
        message: err.message(),
        line,
        position,
    };
    serde_json::to_string(&record).expect("error records serialize")
}
