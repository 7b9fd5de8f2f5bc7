use std::fmt;

/// A command failure, classified by exit status.
#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or configuration (exit 1).
    Usage(anyhow::Error),
    /// Unreadable or invalid input data (exit 2).
    Data(anyhow::Error),
    /// Some grid runs failed; the rest completed (exit 3).
    Partial(String),
}

pub type CliResult<T = ()> = Result<T, CliError>;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Partial(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(e) => write!(f, "usage error: {e:#}"),
            CliError::Data(e) => write!(f, "data error: {e:#}"),
            CliError::Partial(msg) => write!(f, "partial failure: {msg}"),
        }
    }
}

pub fn usage(e: impl Into<anyhow::Error>) -> CliError {
    CliError::Usage(e.into())
}

pub fn data(e: impl Into<anyhow::Error>) -> CliError {
    CliError::Data(e.into())
}

/// Attaches context to an error before classifying it.
pub trait Classify<T> {
    fn usage_ctx(self, ctx: impl fmt::Display) -> CliResult<T>;
    fn data_ctx(self, ctx: impl fmt::Display) -> CliResult<T>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn usage_ctx(self, ctx: impl fmt::Display) -> CliResult<T> {
        self.map_err(|e| CliError::Usage(e.into().context(ctx.to_string())))
    }

    fn data_ctx(self, ctx: impl fmt::Display) -> CliResult<T> {
        self.map_err(|e| CliError::Data(e.into().context(ctx.to_string())))
    }
}
