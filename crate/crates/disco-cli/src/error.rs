use std::fmt;
use std::path::Path;

/// Process exit code on success.
pub const EXIT_OK: i32 = 0;
/// Unreadable inputs, unwritable outputs.
pub const EXIT_IO: i32 = 2;
/// An input artifact carries a different format version.
pub const EXIT_VERSION: i32 = 3;
/// Inputs are readable but fail validation.
pub const EXIT_VALIDATION: i32 = 4;

/// Stage errors carrying their process exit code.
#[derive(Debug)]
pub enum CliError {
    Io {
        context: String,
        source: std::io::Error,
    },
    Version {
        path: String,
        found: String,
    },
    Validation {
        message: String,
    },
}

impl CliError {
    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io {
            context: context.into(),
            source,
        }
    }

    pub fn io_at(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            context: path.display().to_string(),
            source,
        }
    }

    pub fn version(path: &Path, found: impl Into<String>) -> Self {
        CliError::Version {
            path: path.display().to_string(),
            found: found.into(),
        }
    }

    pub fn validation(message: impl Into<String>) -> Self {
        CliError::Validation {
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => EXIT_IO,
            CliError::Version { .. } => EXIT_VERSION,
            CliError::Validation { .. } => EXIT_VALIDATION,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io { context, source } => write!(f, "{context}: {source}"),
            CliError::Version { path, found } => write!(
                f,
                "{path}: format version `{found}` does not match this build's `{}`",
                disco_core::FORMAT_VERSION
            ),
            CliError::Validation { message } => write!(f, "{message}"),
        }
    }
}

impl std::error::Error for CliError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            CliError::Io { source, .. } => Some(source),
            _ => None,
        }
    }
}
