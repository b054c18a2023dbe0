use std::process::ExitCode;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("monte carlo disagrees with the analytic result: |z| = {0:.3} > 4")]
    ZScore(f64),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 4,
            CliError::ZScore(_) => 5,
        })
    }
}

impl From<fiberdd::Error> for CliError {
    fn from(e: fiberdd::Error) -> Self {
        match e {
            fiberdd::Error::NotConverged { .. } | fiberdd::Error::PointFailed { .. } => {
                CliError::Numerical(e.to_string())
            }
            other => CliError::Config(vec![other.to_string()]),
        }
    }
}
