use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    /// Every ABL numerator vanishes: the post-selected ensemble is empty
    /// whenever this intermediate measurement is performed.
    #[error("post-selection impossible for this intermediate measurement (denominator {denominator:e})")]
    PostSelectionImpossible { denominator: f64 },

    #[error("weak value undefined: pre- and post-selected states are orthogonal (overlap {overlap:e})")]
    WeakValueUndefined { overlap: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown variant `{0}`")]
    UnknownVariant(String),

    #[error("missing {time} event in trial {trial_id}")]
    MissingEvent { time: String, trial_id: u64 },

    #[error("empty ensemble")]
    EmptyEnsemble,

    #[error("observed outcome {eigenvalue} is not an outcome of the reference distribution")]
    OutcomeNotInReference { eigenvalue: f64 },

    #[error("expected count {expected:.3} for outcome {eigenvalue} is below 5")]
    ExpectedCountTooSmall { eigenvalue: f64, expected: f64 },
}
