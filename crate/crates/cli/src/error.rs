use thiserror::Error;

/// Command failure carrying its stable process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Corrupt(String),
    #[error("{0}")]
    Insufficient(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
            CliError::Corrupt(_) => 4,
            CliError::Insufficient(_) => 5,
            CliError::Internal(_) => 1,
        }
    }
}

impl From<faultsense::Error> for CliError {
    fn from(e: faultsense::Error) -> Self {
        use faultsense::Error as E;
        let msg = e.to_string();
        match e {
            E::Config(_) => CliError::Config(msg),
            E::Stream(_) | E::Input(_) => CliError::Corrupt(msg),
            E::InsufficientData(_) | E::Calibration(_) => CliError::Insufficient(msg),
            E::Solver(_) | E::NotFound(_) | E::Training(_) | E::Phase(_) => CliError::Internal(msg),
        }
    }
}
