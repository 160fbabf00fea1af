use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error at {location}: {message}")]
    Config { location: String, message: String },
    #[error(transparent)]
    Compute(#[from] freeact_core::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// Module errors that are not verdicts mean the inputs were outside a module's
    /// domain, so they share the config-error status.
    pub fn exit_code(&self) -> i32 {
        1
    }
}
