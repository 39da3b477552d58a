use std::io;

use thiserror::Error;

/// Errors raised by the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("resource limit: {0}")]
    ResourceLimit(String),

    #[error("argument {requested} exceeds the sieve table bound {bound}")]
    Cutoff { requested: u64, bound: u64 },

    #[error("inversion cutoff T = {tau} too small: |φ(T)| = {modulus:e}")]
    InversionCutoff { tau: f64, modulus: f64 },

    #[error("computation infeasible: {0}")]
    Infeasible(String),

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("malformed {what}: {detail}")]
    Format { what: &'static str, detail: String },

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn format(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Format {
            what,
            detail: detail.into(),
        }
    }
}
