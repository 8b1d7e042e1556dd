use std::fmt;
use std::path::Path;

/// Failure of a subcommand, classified by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags or configuration values.
    Config(String),
    /// Unreadable or inconsistent input data.
    Data(String),
    /// Results could not be written.
    Output(String),
    /// A bug: the library rejected a call the CLI should not have made.
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Internal(_) => 1,
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Output(_) => 4,
        }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn output(path: &Path, err: impl fmt::Display) -> Self {
        CliError::Output(format!("cannot write {}: {err}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) | CliError::Data(m) | CliError::Output(m) | CliError::Internal(m) => f.write_str(m),
        }
    }
}

impl From<omma::Error> for CliError {
    fn from(e: omma::Error) -> Self {
        use omma::Error;
        let msg = e.to_string();
        match e {
            Error::InvalidArgument(_) | Error::UnsupportedMetric(_) => CliError::Config(msg),
            Error::Protocol(_) => CliError::Internal(msg),
            _ if e.is_data_error() => CliError::Data(msg),
            _ => CliError::Internal(msg),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
