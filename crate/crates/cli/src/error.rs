use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad configuration or arguments; nothing has been written.
    #[error("invalid input: {0}")]
    Invalid(String),
    /// The computation failed; partial results may have been written.
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => 2,
            CliError::Numerical(_) | CliError::Io(_) => 1,
        }
    }
}

impl From<magnetodisk_core::Error> for CliError {
    fn from(e: magnetodisk_core::Error) -> Self {
        CliError::Numerical(e.to_string())
    }
}
