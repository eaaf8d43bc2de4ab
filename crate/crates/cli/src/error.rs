use ifm::IfmError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("unknown protocol `{0}` (expected one of: {list})", list = crate::protocols::NAMES.join(", "))]
    UnknownProtocol(String),
    #[error("malformed config: {0}")]
    Config(String),
    #[error("invalid parameters: {0}")]
    Validation(String),
    #[error("conditioning failed: {0}")]
    Conditioning(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::UnknownProtocol(_) => 3,
            CliError::Config(_) => 4,
            CliError::Validation(_) => 5,
            CliError::Conditioning(_) => 6,
            CliError::Io(_) => 7,
        }
    }
}

impl From<IfmError> for CliError {
    fn from(e: IfmError) -> Self {
        match e {
            IfmError::PostSelectionImpossible { .. }
            | IfmError::MeasureZero(_)
            | IfmError::AblUndefined(_) => CliError::Conditioning(e.to_string()),
            IfmError::Scenario(_) => CliError::Config(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
