//! Crate-wide error type with an exit-code mapping for the CLI.

use thiserror::Error;

/// Which end of a series a failed extremum search ran into.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtremumKind {
    Max,
    Min,
}

impl std::fmt::Display for ExtremumKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ExtremumKind::Max => write!(f, "max"),
            ExtremumKind::Min => write!(f, "min"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration, flags, or input files.
    #[error("config error: {0}")]
    Config(String),

    /// Operator or state dimensions do not match.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// The time integrator could not continue.
    #[error("integration failure at t = {t}: {reason}")]
    Integration { t: f64, reason: String },

    /// A state invariant (trace, Hermiticity, positivity) broke beyond tolerance.
    #[error("state corruption at t = {t}: {what}")]
    StateCorruption { t: f64, what: String },

    /// The series has no interior extremum of the requested kind.
    #[error("no interior {kind} for `{quantity}`: best value sits on the boundary (index {boundary_index})")]
    NoExtremum {
        quantity: String,
        kind: ExtremumKind,
        boundary_index: usize,
    },

    /// The series is flat; an extremum is undefined.
    #[error("degenerate extremum for `{quantity}`: series is flat")]
    DegenerateExtremum { quantity: String },

    /// A bisection predicate never changes sign over the search range.
    #[error("no threshold in [{lo}, {hi}]: {reason}")]
    NoThreshold { lo: f64, hi: f64, reason: String },

    /// Input outside the mathematical domain of an analysis routine.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// CLI exit code: 2 config, 3 integration, 4 analysis.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Dimension(_) | Error::Io(_) => 2,
            Error::Integration { .. } | Error::StateCorruption { .. } => 3,
            Error::NoExtremum { .. }
            | Error::DegenerateExtremum { .. }
            | Error::NoThreshold { .. }
            | Error::Domain(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
