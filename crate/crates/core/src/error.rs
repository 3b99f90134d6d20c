use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Non-monotone sample index or otherwise corrupt stream.
    #[error("stream error: {0}")]
    Stream(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("calibration error: {0}")]
    Calibration(String),
    /// Non-finite or malformed values handed to a model.
    #[error("input error: {0}")]
    Input(String),
    /// The incremental solver could not restore optimality; the model was rolled back.
    #[error("solver error: {0}")]
    Solver(String),
    #[error("point {0} not found")]
    NotFound(u64),
    #[error("training error: {0}")]
    Training(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("phase error: {0}")]
    Phase(String),
}
