use std::fmt;

/// A failure of one command, classified for the exit code.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Bad flags, config keys, files or parameters: exit code 2.
    Input(String),
    /// The numerics did not deliver: exit code 3.
    Numerical(String),
}

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    /// One line of JSON for standard error.
    pub fn to_line(&self) -> String {
        let (kind, msg) = match self {
            CliError::Input(m) => ("invalid_input", m),
            CliError::Numerical(m) => ("numerical_failure", m),
        };
        serde_json::json!({ "error": kind, "message": msg }).to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) | CliError::Numerical(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<entroflow_core::Error> for CliError {
    fn from(e: entroflow_core::Error) -> Self {
        if e.is_input_error() {
            CliError::Input(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Input(format!("csv: {e}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;
