use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("sequence term {index} is {value}, expected a finite nonnegative real")]
    InvalidTerm { index: usize, value: f64 },

    #[error("tabulated sequence ends at index {last} before a qualifying term")]
    HorizonExhausted { last: usize },

    #[error("index search overflowed while inverting a sequence at level {level}")]
    IndexOverflow { level: f64 },

    #[error("partial sum overflowed at index {index}")]
    Overflow { index: usize },

    #[error("probabilities sum to {sum}, expected 1")]
    ProbabilitySum { sum: f64 },

    #[error("negative probability {0}")]
    NegativeProbability(f64),

    #[error("intervals live in different spaces")]
    MixedSpaces,

    #[error("block {block} unreachable within horizon {horizon} (threshold {threshold})")]
    BlockUnreachable {
        block: usize,
        horizon: usize,
        threshold: f64,
    },

    #[error("sum of indicator measures E_n is zero")]
    ZeroMass,

    #[error("state {state} outside the process state space")]
    StateOutOfSpace { state: f64 },

    #[error("regeneration probability s(x) = {0} outside [0, 1]")]
    InvalidRegeneration(f64),

    #[error("matrix row {row} sums to {sum}, not 1")]
    NotStochastic { row: usize, sum: f64 },

    #[error("marginal is not invariant under the kernel (max deviation {deviation})")]
    NotInvariant { deviation: f64 },

    #[error("Fourier tail bound {bound} exceeds requested tolerance {tolerance}")]
    TruncationTooCoarse { bound: f64, tolerance: f64 },

    #[error("too few samples: {got} (need {need})")]
    TooFewSamples { got: usize, need: usize },

    #[error("LSV experiments need a calibration table")]
    CalibrationMissing,

    #[error("calibration file: {0}")]
    Calibration(String),

    #[error("writing run to {dir}: {source} (written so far: {written:?})")]
    Persist {
        dir: std::path::PathBuf,
        written: Vec<String>,
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
