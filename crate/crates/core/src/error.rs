//! Shared error type for the whole crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A trace-file line could not be parsed as JSON.
    #[error("line {line}: parse error: {message}")]
    Parse { line: usize, message: String },

    /// A trace-file record is missing a required field.
    #[error("line {line}: missing required field `{field}`")]
    MissingField { line: usize, field: String },

    /// The trace-file header declares a schema version other than the
    /// one the caller asked for.
    #[error("schema version mismatch: expected `{expected}`, found `{found}`")]
    SchemaVersion { expected: String, found: String },

    /// A trace-file record violates a data-model invariant.
    #[error("line {line}: invalid record: {message}")]
    InvalidRecord { line: usize, message: String },

    /// An operation's input violates its contract.
    #[error("{0}")]
    Validation(String),

    /// A configuration value is out of range or inconsistent.
    #[error("invalid config: {0}")]
    Config(String),

    /// Repeat rate is undefined because the denominator is empty.
    #[error("repeat rate undefined: {0}")]
    UndefinedRate(String),

    /// The stopping-policy state machine was driven into an inconsistent
    /// state (e.g. stepped after completion).
    #[error("policy state error: {0}")]
    PolicyState(String),

    /// A step generator failed mid-run.
    #[error("generator failed at step {step}: {message}")]
    Generator { step: u64, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
