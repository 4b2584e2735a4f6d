use thiserror::Error;

/// Errors raised by the library.
///
/// The variants line up with the exit-code classes used by the command-line
/// front end: `Input`, `Config` and `Calibration` are configuration problems,
/// `Resource` is a budget breach and `Contract` is a caller bug.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("invalid probability distribution for player {player} at period {period}: {reason}")]
    InvalidDistribution { player: usize, period: usize, reason: String },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("calibration failed: {0}")]
    Calibration(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}
