use thiserror::Error;

/// Errors produced by the butterfly library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate interpolation grid: nodes {0} and {1} coincide")]
    DegenerateGrid(usize, usize),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("power iteration did not converge after {iterations} iterations (last estimate {last})")]
    NotConverged { iterations: usize, last: f64 },

    #[error("training diverged at iteration {iteration}: loss = {loss}")]
    Diverged { iteration: usize, loss: f64 },

    #[error("malformed factor file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
