use std::process::ExitCode;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    /// A result was computed but fails its reliability check; the output
    /// files are still written.
    #[error("unreliable result: {0}")]
    Unreliable(String),
    #[error(transparent)]
    Numerical(twocenter::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<twocenter::Error> for CliError {
    fn from(e: twocenter::Error) -> Self {
        match e {
            twocenter::Error::InvalidParams(m) | twocenter::Error::Table(m) | twocenter::Error::Loop(m) => CliError::Config(m),
            e => CliError::Numerical(e),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Config(_) => ExitCode::from(2),
            CliError::Unreliable(_) | CliError::Numerical(_) => ExitCode::from(3),
            CliError::Io(_) => ExitCode::from(1),
        }
    }
}
