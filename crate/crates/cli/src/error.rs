use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Parse(String),
    #[error("invalid computation: {0}")]
    Validity(#[from] bosegas::Error),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Validity(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}
