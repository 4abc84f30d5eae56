//! Exit codes: 0 success, 1 verification or convergence failure, 2 input
//! error.

use std::fmt;
use std::process::ExitCode;

use bestprox_core::Error;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, values outside their domain, unwritable output paths.
    Input(String),
    /// A property, a comparison or a run failed.
    Failure(String),
}

impl CliError {
    pub fn code(&self) -> ExitCode {
        match self {
            CliError::Input(_) => ExitCode::from(2),
            CliError::Failure(_) => ExitCode::from(1),
        }
    }

    pub fn io(e: impl fmt::Display) -> Self {
        CliError::Input(format!("cannot write output: {e}"))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "{m}"),
            CliError::Failure(m) => write!(f, "{m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidInput(_)
            | Error::DimensionMismatch { .. }
            | Error::Precondition(_)
            | Error::Configuration(_) => CliError::Input(e.to_string()),
            Error::NonConvergence { .. } | Error::Numerical(_) | Error::Declaration { .. } => {
                CliError::Failure(e.to_string())
            }
        }
    }
}
