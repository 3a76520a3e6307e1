use std::path::PathBuf;

/// Errors produced by the estimators, the simulator and the run harness.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A quantile was requested from a sample set or histogram without mass.
    #[error("insufficient reports: {0}")]
    InsufficientData(&'static str),

    #[error("{name} = {value} is outside its domain ({expected})")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    /// The iterative error bound only holds for r >= 100 and p <= 0.7 p_L.
    #[error("iterative error bound not applicable: {0}")]
    BoundNotApplicable(String),

    #[error("non-finite SNR value {0}")]
    NonFinite(f64),

    #[error("histogram geometry mismatch: [{0}, {1}) vs [{2}, {3}) tenths of dB")]
    GeometryMismatch(i32, i32, i32, i32),

    /// A group instruction left part of the SNR axis uncovered.
    #[error("group instruction does not cover SNR {0} dB")]
    Uncovered(f64),

    #[error("invalid group instruction: {0}")]
    InvalidInstruction(String),

    #[error("invalid MCS table: {0}")]
    InvalidMcsTable(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(name: &'static str, value: f64, expected: &'static str) -> Error {
    Error::Domain {
        name,
        value,
        expected,
    }
}
