use num::BigUint;
use thiserror::Error;

use crate::model::Violation;

pub type Result<T> = std::result::Result<T, FairError>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FairError {
    #[error("invalid instance: {}", format_violations(.0))]
    Invalid(Vec<Violation>),

    /// The search space (product of alternative counts, or partition count)
    /// is larger than the configured cap. `required` is exact.
    #[error("search space of {required} exceeds cap {cap}")]
    CapExceeded { required: BigUint, cap: u64 },

    #[error("degenerate instance: {0}")]
    Degenerate(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error: {0}")]
    Parse(String),
}

fn format_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
