use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("config: {0}")]
    Config(String),
    #[error("unknown subcommand {0:?}")]
    UnknownSubcommand(String),
    #[error(transparent)]
    Core(#[from] qcomm::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("output: {0}")]
    Output(String),
}

pub type Result<T> = std::result::Result<T, LabError>;
