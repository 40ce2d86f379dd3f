use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] minen_core::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// 2 for usage and configuration problems, 3 for I/O, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(e) if e.is_config() => 2,
            CliError::Core(minen_core::Error::Io(_) | minen_core::Error::Csv(_)) => 3,
            CliError::Core(_) => 1,
            CliError::Io(_) | CliError::Csv(_) => 3,
        }
    }
}
