//! Error type shared by every module.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("element is not integral (valuation {0})")]
    NotIntegral(String),
    #[error("cannot embed ramification {0} into {1}")]
    BadEmbedding(u32, u32),
    #[error("valuation {0} is not in (1/{1})Z")]
    NotInValueGroup(String, u32),
    #[error("residual factor needs a residue field extension: {0}")]
    UnsupportedResidueExtension(String),
    #[error("degenerate lift: resultant vanishes")]
    Degenerate,
    #[error("degree cap exceeded: {0} > {1}")]
    DegreeCap(u64, u64),
    #[error("precision limit reached: {0}")]
    PrecisionExhausted(String),
    #[error("repeated-root refinement stalled: {0}")]
    NonSeparable(String),
    #[error("not a probability measure: {0}")]
    NotProbability(String),
    #[error("trivial tree")]
    TrivialTree,
    #[error("unsupported point type: {0}")]
    UnsupportedPointType(String),
    #[error("certification failed: {0}")]
    CertificationFailed(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
