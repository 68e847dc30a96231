use std::process::ExitCode;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, unreadable or malformed inputs, invalid configuration.
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Divergence(String),
    #[error("{0}")]
    Output(String),
    #[error("{0}")]
    NotReproduced(String),
}

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }

    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Input(_) => ExitCode::from(2),
            CliError::Divergence(_) => ExitCode::from(3),
            CliError::Output(_) | CliError::NotReproduced(_) => ExitCode::from(1),
        }
    }

    /// Library error raised while processing `context`.
    pub fn lib(context: &str, e: nlplap::Error) -> Self {
        match e {
            nlplap::Error::Divergence { gamma, iteration } => CliError::Divergence(format!(
                "{context}: solver diverged at iteration {iteration} with step --step {gamma}; use a smaller step or auto"
            )),
            e => CliError::Input(format!("{context}: {e}")),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
