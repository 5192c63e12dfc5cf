//! Crate-wide error type.

use thiserror::Error;

use crate::corpus::Space;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Magic, version, or another header field of an embedding file is invalid.
    #[error("invalid embedding file: {0}")]
    Format(String),

    /// Declared payload size disagrees with the bytes actually present.
    #[error("truncated embedding file: {0}")]
    Truncation(String),

    /// Payload content violates a data invariant (non-finite entry, bad norm).
    #[error("invalid embedding data: {0}")]
    Data(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// A row with zero L2 norm cannot be normalized.
    #[error("cannot normalize zero-norm row {row}")]
    DegenerateVector { row: usize },

    #[error("duplicate record id {id:?} (line {line})")]
    DuplicateId { id: String, line: usize },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// A matrix does not line up with the records it is attached to.
    #[error("alignment error: {0}")]
    Alignment(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    /// The provider gave up after the configured number of retries.
    #[error("provider error for record {record_id:?}: {msg}")]
    Provider { record_id: String, msg: String },

    #[error("provider returned an empty response for record {record_id:?}")]
    EmptyResponse { record_id: String },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("space mismatch: index holds {index} vectors, queries are {queries}")]
    SpaceMismatch { index: Space, queries: Space },

    #[error("benchmark has no queries")]
    EmptyBenchmark,

    /// Two indexes that must cover the same pool do not.
    #[error("pool mismatch: {0}")]
    PoolMismatch(String),

    #[error("missing {space} embeddings on {what}")]
    MissingSpace { space: Space, what: String },

    #[error("row {row} out of bounds for {count} rows")]
    IndexOutOfBounds { row: usize, count: usize },

    #[error("capacity exceeded: {0}")]
    Capacity(String),
}
