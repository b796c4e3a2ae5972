use std::fmt;

/// Failure of a command, split by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Unreadable or malformed input, or an invalid configuration (exit 2).
    Config(anyhow::Error),
    /// A model or numerical failure (exit 1).
    Model(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Model(_) => 1,
            CliError::Config(_) => 2,
        }
    }

    pub fn config(msg: impl fmt::Display) -> Self {
        CliError::Config(anyhow::anyhow!("{msg}"))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(e) | CliError::Model(e) => write!(f, "{e:#}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<elliptical_pareto::Error> for CliError {
    fn from(e: elliptical_pareto::Error) -> Self {
        CliError::Model(e.into())
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Attaches context and classifies an error.
pub trait Classify<T> {
    fn config_err(self, ctx: impl fmt::Display) -> CliResult<T>;
    fn model_err(self, ctx: impl fmt::Display) -> CliResult<T>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn config_err(self, ctx: impl fmt::Display) -> CliResult<T> {
        self.map_err(|e| CliError::Config(e.into().context(ctx.to_string())))
    }

    fn model_err(self, ctx: impl fmt::Display) -> CliResult<T> {
        self.map_err(|e| CliError::Model(e.into().context(ctx.to_string())))
    }
}
