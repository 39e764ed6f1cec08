use thiserror::Error;

use crate::model::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Malformed document text; `line` and `column` are 1-based.
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    /// A structural rule was broken; the violation names the rule.
    #[error("{0}")]
    Invalid(Violation),

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("variable `{variable}` has no state `{state}`")]
    UnknownState { variable: String, state: String },

    #[error("variable `{0}` is assigned more than once")]
    DuplicateAssignment(String),

    /// P(evidence) is zero, so the conditional is undefined.
    #[error("evidence has probability zero under the model")]
    InconsistentEvidence,

    #[error("variable `{0}` appears both as evidence and as an intervention")]
    Overlap(String),

    #[error("assignment is missing variable `{0}`")]
    PartialAssignment(String),

    #[error("{what} has {size} entries, above the cap of {cap}")]
    CapExceeded {
        what: &'static str,
        size: u128,
        cap: u128,
    },

    #[error("invalid intervention space: {0}")]
    InvalidSpace(String),

    #[error("invalid classifier config: {0}")]
    InvalidConfig(String),

    #[error("invalid risk table: {0}")]
    InvalidRiskTable(String),

    #[error("search cancelled")]
    Cancelled,
}

impl Error {
    /// Stable machine-readable code for the error kind.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "syntax",
            Error::Invalid(v) => v.rule.code(),
            Error::UnknownVariable(_) => "unknown-variable",
            Error::UnknownState { .. } => "unknown-state",
            Error::DuplicateAssignment(_) => "duplicate-assignment",
            Error::InconsistentEvidence => "inconsistent-evidence",
            Error::Overlap(_) => "evidence-intervention-overlap",
            Error::PartialAssignment(_) => "partial-assignment",
            Error::CapExceeded { .. } => "cap-exceeded",
            Error::InvalidSpace(_) => "invalid-space",
            Error::InvalidConfig(_) => "invalid-config",
            Error::InvalidRiskTable(_) => "invalid-risk-table",
            Error::Cancelled => "cancelled",
        }
    }
}
