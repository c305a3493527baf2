use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("duplicate pilot index {0}")]
    DuplicateIndex(usize),

    #[error("pilot index {index} out of range for N = {n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("anchor {0} is not one of the pilot indices")]
    AnchorNotInPattern(usize),

    #[error("pattern has no pilots")]
    EmptyPattern,

    #[error("pattern was designed for N = {pattern_n}, grid has N = {grid_n}")]
    GridMismatch { pattern_n: usize, grid_n: usize },

    #[error("sidelobe window [{tau_min}, {tau_max}] is empty or invalid for N = {n}")]
    InvalidWindow {
        tau_min: usize,
        tau_max: usize,
        n: usize,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("invalid swap: {0}")]
    InvalidSwap(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("exhaustive search over {0} patterns exceeds the enumeration limit")]
    InstanceTooLarge(u128),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("pattern file: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Configuration problems are reported separately from runtime failures
    /// by the command-line front-end.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidGrid(_)
                | Error::DuplicateIndex(_)
                | Error::IndexOutOfRange { .. }
                | Error::AnchorNotInPattern(_)
                | Error::EmptyPattern
                | Error::GridMismatch { .. }
                | Error::InvalidWindow { .. }
                | Error::InvalidConfig(_)
                | Error::Json(_)
        )
    }
}
