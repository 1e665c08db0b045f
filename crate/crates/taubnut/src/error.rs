//! Engine-wide error type.

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("division by zero: divisor canonicalizes to 0")]
    DivisionByZero,
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("canonicalization mismatch: symbolic and numeric verdicts disagree ({0})")]
    CanonicalizationMismatch(String),
    #[error("inconsistent binding: {0}")]
    InconsistentBinding(String),
    #[error("derivative past the supported chain: {0}")]
    DerivativeCap(String),
    #[error("basis mismatch: {0}")]
    BasisMismatch(String),
    #[error("degree error: {0}")]
    DegreeError(String),
    #[error("singular coframe: determinant canonicalizes to 0")]
    SingularCoframe,
    #[error("singular metric: determinant canonicalizes to 0")]
    SingularMetric,
    #[error("parameter outside domain: {0}")]
    ParameterDomain(String),
    #[error("gauge R(r)=r not applied")]
    GaugeNotApplied,
    #[error("unknown case: {0}")]
    UnknownCase(String),
    #[error("field is not Killing for this metric")]
    NotKilling,
    #[error("model is not in a timelike (NUT) region at the sample point")]
    NotTimelikeRegion,
    #[error("expression diverges as r goes to infinity")]
    Divergent,
    #[error("unknown suite: {0}")]
    UnknownSuite(String),
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("missing numeric binding for {0}")]
    MissingBinding(String),
    #[error("odd power of an eliminated symbol survives: {0}")]
    OddParity(String),
    #[error("internal consistency check failed: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
