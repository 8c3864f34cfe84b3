use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// The signal (or phase-weighted combination) has zero average power.
    #[error("degenerate signal: average power is zero")]
    DegenerateSignal,

    #[error("exhaustive search over {candidates} phase vectors exceeds the cap of {cap}")]
    SearchCapExceeded { candidates: u128, cap: u64 },

    #[error("target CCDF {target} is below the resolution 1/{symbols} of the sample")]
    InsufficientSamples { target: f64, symbols: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
