//! Crate-wide error type.

use alloc::string::String;
use core::fmt;

/// Errors reported by game construction, learning rules, dynamics and metrics.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A vector or profile does not have the dimensions the operation requires.
    Shape {
        context: &'static str,
        expected: usize,
        found: usize,
    },
    /// A numeric argument is outside the domain of the operation.
    Domain(String),
    /// A configuration value or generator specification is invalid.
    Config(String),
    /// The round-synchronous protocol was violated (rounds out of order,
    /// duplicate or missing queries, metrics asked for data a trajectory
    /// does not carry).
    Protocol(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Shape {
                context,
                expected,
                found,
            } => write!(f, "shape mismatch in {context}: expected {expected}, found {found}"),
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Config(msg) => write!(f, "config error: {msg}"),
            Error::Protocol(msg) => write!(f, "protocol error: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
