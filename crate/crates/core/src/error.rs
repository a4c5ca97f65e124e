use thiserror::Error;

use crate::VarId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("variable {var} has cardinality {left} in one operand and {right} in the other")]
    CardinalityMismatch { var: VarId, left: usize, right: usize },

    /// A denominator entry is zero while the matching numerator is not.
    #[error("undefined quotient: {what}")]
    UndefinedQuotient { what: String },

    /// A log or negative power was applied to a zero (or negative) entry.
    #[error("non-positive entry in {what}")]
    NonPositive { what: String },

    #[error("non-finite result while computing {what}")]
    NonFinite { what: String },

    #[error("domain has {cells} cells, above the limit of {limit}")]
    DomainTooLarge { cells: f64, limit: f64 },

    #[error("graph is not chordal")]
    NotChordal,

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("invalid request: {0}")]
    InvalidRequest(String),

    #[error("empty dataset with zero pseudocount")]
    EmptyDataset,

    #[error("no clique covers variables {0:?}")]
    ScopeNotCovered(Vec<VarId>),

    #[error("{0}")]
    Io(String),

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    /// Re-labels positivity errors so they name the model the factor came from.
    pub(crate) fn in_context(self, ctx: &str) -> Self {
        match self {
            Error::NonPositive { what } => Error::NonPositive {
                what: format!("{ctx}: {what}"),
            },
            Error::UndefinedQuotient { what } => Error::UndefinedQuotient {
                what: format!("{ctx}: {what}"),
            },
            Error::NonFinite { what } => Error::NonFinite {
                what: format!("{ctx}: {what}"),
            },
            other => other,
        }
    }
}
