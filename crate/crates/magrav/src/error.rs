//! Crate-wide error type.
//!
//! Degenerate inputs (singular metrics, non-invertible tetrads, malformed
//! scenarios, exhausted sample budgets) are hard errors, never silent
//! fallbacks.

use thiserror::Error;

/// Errors produced by parsing, evaluation, and the geometric operations.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Syntax error while parsing a scalar expression.
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    /// An identifier that is not registered in the variable table.
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),

    /// A ghost or antifield variable used outside the graded algebra.
    #[error("variable `{0}` is {1} and not allowed in a scalar expression")]
    IllegalRole(String, &'static str),

    /// A variable registered twice in one table.
    #[error("duplicate variable `{0}`")]
    DuplicateVariable(String),

    /// Dimension outside the supported range.
    #[error("dimension {0} is outside the supported range 2..=4")]
    BadDimension(usize),

    /// Component index out of range for the ambient dimension.
    #[error("index {got} out of range for dimension {dim}")]
    IndexRange { got: usize, dim: usize },

    /// Mismatched shapes, charts, or bundles between operands.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A declared symmetry that the supplied components violate.
    #[error("symmetry violation: {0}")]
    Symmetry(String),

    /// A metric (or tetrad) that fails its nondegeneracy checks.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// Evaluation hit a domain violation (log/sqrt of a nonpositive value,
    /// division by zero, missing variable binding).
    #[error("evaluation domain error: {0}")]
    Domain(String),

    /// Could not find admissible sample points within the retry budget.
    #[error("sampling exhausted after {0} attempts (expression may be singular almost everywhere)")]
    SamplingExhausted(usize),

    /// A total derivative would need a jet variable beyond the configured order.
    #[error("jet order exceeded: {0}")]
    JetOrder(String),

    /// Malformed scenario file.
    #[error("scenario error at line {line}: {msg}")]
    Scenario { line: usize, msg: String },

    /// Anything that went wrong while writing a report.
    #[error("report error: {0}")]
    Report(String),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
