use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A model or configuration parameter is outside its valid range.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// The arguments are individually valid but the requested value is undefined.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("no closed form for the {0} response-time model; use `simulate` instead")]
    NoClosedForm(&'static str),

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parameter(_) | Error::Domain(_) | Error::NoClosedForm(_) => 2,
            Error::Io { .. } => 3,
        }
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
