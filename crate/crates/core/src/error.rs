use thiserror::Error;

/// Everything that can go wrong while building or running a simulation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum IfmError {
    #[error("unknown mode `{0}`")]
    UnknownMode(String),

    #[error("duplicate mode label `{0}`")]
    DuplicateMode(String),

    #[error("mode space must contain at least one mode")]
    EmptyModeSpace,

    #[error("conditioning on measure-zero event (live probability {0:e})")]
    MeasureZero(f64),

    #[error("post-selection impossible: detector `{detector}` has probability {probability:e}")]
    PostSelectionImpossible { detector: String, probability: f64 },

    #[error("ABL undefined for this selection (denominator {0:e})")]
    AblUndefined(f64),

    #[error("unknown detector `{0}`")]
    UnknownDetector(String),

    #[error("detectors `{first}` and `{second}` both read mode `{mode}`")]
    DuplicateDetectorMode {
        first: String,
        second: String,
        mode: String,
    },

    #[error("step {step}: mode `{mode}` is touched by more than one element")]
    OverlappingElements { step: usize, mode: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("state spaces differ: {0}")]
    SpaceMismatch(String),

    #[error("composite input carries a non-empty absorption ledger")]
    LedgerNotEmpty,

    #[error("irradiation metric undefined: {0}")]
    IrradiationUndefined(String),

    #[error("malformed scenario: {0}")]
    Scenario(String),
}

pub type Result<T> = std::result::Result<T, IfmError>;
