use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("estimator error: {0}")]
    Estimator(etcausal::Error),
    #[error("reproduction failed: {0}")]
    TargetFailed(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Malformed(_) => 2,
            CliError::Parameter(_) => 3,
            CliError::Estimator(_) => 4,
            CliError::TargetFailed(_) => 5,
        }
    }
}

impl From<etcausal::Error> for CliError {
    fn from(e: etcausal::Error) -> Self {
        match e {
            etcausal::Error::Input(m) => CliError::Malformed(m),
            etcausal::Error::InvalidParameter(m) => CliError::Parameter(m),
            other => CliError::Estimator(other),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
