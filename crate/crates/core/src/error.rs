use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("non-invertible: {0}")]
    NonInvertible(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("field mismatch between operands")]
    FieldMismatch,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("rank deficient: {0}")]
    RankDeficient(String),

    #[error("infeasible enumeration: {0}")]
    Infeasible(String),

    #[error("outside regime: {0}")]
    OutsideRegime(String),

    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("cannot compare exact and empirical distributions without allowing mixed modes")]
    MixedModes,

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
