use std::fmt;

/// Failure of a CLI invocation, carrying its exit status.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Unknown command or malformed arguments.
    Usage(String),
    /// Configuration or input rejected before or during a run. `path` names
    /// the offending JSON location when there is one.
    Validation { path: String, message: String },
    /// A numerical method failed.
    Numerical(String),
    Io(String),
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

impl CliError {
    pub fn validation(path: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Validation { path: path.into(), message: message.into() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Validation { .. } => EXIT_VALIDATION,
            CliError::Numerical(_) => EXIT_NUMERICAL,
            CliError::Io(_) => EXIT_IO,
        }
    }

    /// Library error raised while handling the config value at `path`.
    pub fn at(path: &str, err: ringlaw::Error) -> Self {
        if err.is_numerical() {
            CliError::Numerical(err.to_string())
        } else {
            CliError::validation(path, err.to_string())
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Validation { path, message } if path.is_empty() => write!(f, "invalid input: {message}"),
            CliError::Validation { path, message } => write!(f, "invalid config at `{path}`: {message}"),
            CliError::Numerical(msg) => write!(f, "numerical failure: {msg}"),
            CliError::Io(msg) => write!(f, "i/o error: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ringlaw::Error> for CliError {
    fn from(err: ringlaw::Error) -> Self {
        CliError::at("", err)
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Io(err.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
