use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    /// A series or quadrature failed to reach the requested accuracy.
    #[error("accuracy error: {0}")]
    Accuracy(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("no root: {0}")]
    NoRoot(String),

    #[error("divergence at iteration {iter}: {msg}")]
    Divergence { iter: usize, msg: String },

    #[error("field blow-up at t = {time}: non-finite values")]
    BlowUp { time: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code contract: 1 for numerical failures, 2 for bad input.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Accuracy(_) | Error::Divergence { .. } | Error::BlowUp { .. } | Error::Io(_) => 1,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
