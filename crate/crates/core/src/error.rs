use thiserror::Error;

use crate::Rational;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("drift p = {p} is outside the open interval (1/{lo_den}, 1/2) for d = {d}", lo_den = d + 1)]
    OutOfRange { d: u32, p: Rational },
    #[error("arity d = {0} is not supported here (need d >= {1})")]
    InvalidArity(u32, u32),
    #[error("index u = {u} outside 0..={max} for d = {d}", max = d.saturating_sub(1))]
    Index { d: u32, u: u32 },
    #[error("arity mismatch: expected d+1 = {expected}, got {got} (or differing p)")]
    ArityMismatch { expected: u32, got: u32 },
    #[error("assembled exponent {0} of g is negative")]
    NegativeExponent(i64),
    #[error("resources exhausted: {0}")]
    ResourceExhausted(String),
    #[error("no candidate drift certified for d = {0}")]
    SearchExhausted(u32),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Stable machine-readable tag for structured error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::OutOfRange { .. } => "OutOfRange",
            Error::InvalidArity(..) => "InvalidArity",
            Error::Index { .. } => "IndexError",
            Error::ArityMismatch { .. } => "ArityMismatch",
            Error::NegativeExponent(_) => "NegativeExponent",
            Error::ResourceExhausted(_) => "ResourceExhausted",
            Error::SearchExhausted(_) => "SearchExhausted",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::Parse(_) => "ParseError",
        }
    }
}
