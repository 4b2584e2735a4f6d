use std::path::PathBuf;

use devlab_core::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("{0}")]
    Usage(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Assertion(String),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    /// 0 success, 1 assertion failure, 2 configuration error, 3 resource error.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Assertion(_) => 1,
            CliError::Parse { .. } | CliError::Usage(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Core(e) => match e {
                CoreError::Input(_) | CoreError::Config(_) | CoreError::Calibration(_) => 2,
                CoreError::Resource(_) => 3,
                CoreError::InvalidDistribution { .. } | CoreError::Contract(_) => 1,
            },
        }
    }
}

pub(crate) fn io(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> CliError {
    let context = context.into();
    move |source| CliError::Io { context, source }
}
