use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by the simulation toolkit.
#[derive(Error, Debug)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("RTTM parse error at line {line}: {msg}")]
    Rttm { line: usize, msg: String },
    #[error("manifest error: {0}")]
    Manifest(String),
    #[error("WAV error in {path}: {msg}")]
    Wav { path: String, msg: String },
    #[error("empty pool")]
    EmptyPool,
    #[error("empty plan")]
    EmptyPlan,
    #[error("speaker {0} has no remaining utterances")]
    PoolExhausted(String),
    #[error("simulation error: {0}")]
    Simulation(String),
    #[error("render error: {0}")]
    Render(String),
    #[error("metrics error: {0}")]
    Metrics(String),
    #[error("extraction error: {0}")]
    Extraction(String),
    #[error("sample rate mismatch: expected {expected} Hz, got {got} Hz in {path}")]
    SampleRateMismatch {
        expected: u32,
        got: u32,
        path: String,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
