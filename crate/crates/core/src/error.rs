//! Error types shared across the crate.

use thiserror::Error;

/// Errors raised by state construction, optics, measurement and protocol code.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Bad setup data: unknown or duplicate mode names, non-unitary optics,
    /// malformed run configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// A state violates a structural invariant (mixed photon number where a
    /// single total is required, zero norm, non-finite amplitude, ...).
    #[error("invalid state: {0}")]
    InvalidState(String),

    /// A detector pattern that cannot occur behind a calibrated Bell beam
    /// splitter was observed; this signals a miswired interferometer.
    #[error("beam-splitter convention violation: {0}")]
    ConventionViolation(String),

    /// An operation was called outside its contract (for example, asking for
    /// a parity correction on a failed Bell measurement).
    #[error("contract violation: {0}")]
    Contract(String),
}

pub type Result<T> = std::result::Result<T, Error>;
