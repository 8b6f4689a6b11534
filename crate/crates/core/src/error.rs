use thiserror::Error;

/// Errors produced by the matrix, statevector and pipeline layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("qubit error: {0}")]
    Qubit(String),

    /// The requested outcome has (numerically) zero weight.
    #[error("measurement error: outcome {outcome} on qubit {qubit} has probability {probability}")]
    Measurement {
        qubit: usize,
        outcome: u8,
        probability: f64,
    },

    #[error("layout error: {0}")]
    Layout(String),

    /// G recovery needs a nonzero slack product |b1 b2|^2.
    #[error("normalization recovery undefined: slack product |b1 b2|^2 = {s1}")]
    MethodUndefined { s1: f64 },

    /// No shot landed on K1 = 0, so the ratio cannot be formed.
    #[error("estimate unavailable: {zeros} of {shots} shots gave K1 = 0")]
    EstimateUnavailable { zeros: u64, shots: u64 },

    #[error("invalid manipulation: {0}")]
    Manipulation(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
