use thiserror::Error;

use crate::machine::PinId;

/// Errors shared by the library operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("pin set mismatch: machine has [{expected}], value has [{got}]")]
    PinMismatch { expected: String, got: String },

    #[error("unknown pin `{0}`")]
    UnknownPin(PinId),

    #[error("empty trace has no last sample")]
    EmptyTrace,

    #[error("state budget of {0} exceeded; machine may not be finite")]
    StateBudgetExceeded(usize),

    #[error("monoid element budget of {0} exceeded")]
    ElementBudgetExceeded(usize),

    #[error("invalid product spec: {0}")]
    SpecInvalid(String),

    #[error("invalid pin name `{0}`: names are non-empty [A-Za-z0-9_]+ tokens")]
    InvalidPinName(String),

    #[error("duplicate pin `{0}`")]
    DuplicatePin(PinId),

    #[error("pin set exceeds the supported maximum of {0} pins")]
    TooManyPins(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
