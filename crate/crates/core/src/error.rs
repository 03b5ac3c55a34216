use thiserror::Error;

/// Every failure the toolkit reports.
#[derive(Debug, Error)]
pub enum Error {
    /// Samples do not support a density estimate (ties spanning a whole window,
    /// zero spread, too few points).
    #[error("degenerate sample set: {0}")]
    DegenerateSample(String),

    /// An argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Invalid configuration, including stability (CFL) violations.
    #[error("configuration error: {0}")]
    Config(String),

    /// The model state became non-finite or lost positivity.
    #[error("numerical blow-up at step {step}: {reason}")]
    Blowup { step: usize, reason: String },

    /// A field file or manifest could not be decoded.
    #[error("format error at byte {offset}: {reason}")]
    Format { offset: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        Error::DegenerateSample(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn format(offset: usize, reason: impl Into<String>) -> Self {
        Error::Format {
            offset,
            reason: reason.into(),
        }
    }

    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Domain(_) | Error::DegenerateSample(_) => 2,
            Error::Blowup { .. } => 3,
            Error::Format { .. } => 4,
            Error::Io(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
