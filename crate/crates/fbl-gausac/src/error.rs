//! Crate-wide error type.
//!
//! Variants mirror the failure classes of the public operations: domain
//! violations on scalar inputs, structural size guards, linear-algebra
//! failures, invalid decode schedules, configuration problems (which carry
//! *all* violations found, not just the first), and I/O.

use std::fmt;

/// A single configuration violation, reported with the key path that
/// caused it so users can fix every problem in one pass.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Config key (or key path) the violation belongs to.
    pub key: String,
    /// Human-readable description of what is wrong.
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.key, self.message)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Scalar argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Structural guard exceeded (user count, enumeration size, memory).
    #[error("size error: {0}")]
    Size(String),

    /// Matrix not positive (semi)definite, singular, or dimension mismatch.
    #[error("matrix error: {0}")]
    Matrix(String),

    /// Decode schedule violates its invariants or cannot be constructed.
    #[error("schedule error: {0}")]
    Schedule(String),

    /// One or more configuration violations; every violation found is kept.
    #[error("configuration error:\n{}", format_violations(.0))]
    Config(Vec<Violation>),

    /// Malformed serialized data (bad magic, version, or layout).
    #[error("format error: {0}")]
    Format(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Convenience constructor for a single-violation configuration error.
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config(vec![Violation {
            key: key.into(),
            message: message.into(),
        }])
    }
}

fn format_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(|v| format!("  {v}"))
        .collect::<Vec<_>>()
        .join("\n")
}

pub type Result<T> = std::result::Result<T, Error>;
