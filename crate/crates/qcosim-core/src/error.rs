//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A special-function argument outside its domain (pole, kT ≤ 0, ...).
    #[error("domain error in {func}: {msg}")]
    Domain { func: &'static str, msg: String },

    /// Netlist syntax error with source position.
    #[error("line {line}, col {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },

    /// Netlist elaboration error (undefined parameter, dangling node, ...).
    #[error("elaboration error: {0}")]
    Elaborate(String),

    /// Circuit topology makes the system singular (floating node etc.).
    #[error("topology error: {0}")]
    Topology(String),

    /// Newton iteration failed to converge.
    #[error("convergence failure at t={t:.6e}s: {msg}")]
    Convergence { t: f64, msg: String },

    /// Linear-response solve hit an undamped resonance (iωI - A singular).
    #[error("resonance singularity: undamped mode at f={f:.6e} Hz")]
    ResonanceSingularity { f: f64 },

    /// Analysis configuration problem (missing port, bad axis, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// Generic numeric failure (singular matrix outside topology checks, ...).
    #[error("numeric error: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(func: &'static str, msg: impl Into<String>) -> Self {
        Error::Domain { func, msg: msg.into() }
    }
}
