use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Caller-supplied data violates a precondition (lengths, rates, emptiness).
    #[error("input error: {0}")]
    Input(String),
    /// A file or record could not be parsed or has the wrong schema.
    #[error("format error: {0}")]
    Format(String),
    /// A configuration value is out of its admissible range.
    #[error("parameter error: {0}")]
    Parameter(String),
    /// A numeric argument lies outside the function's domain (e.g. zero RPM).
    #[error("domain error: {0}")]
    Domain(String),
    /// A control value lies outside the annotation codec's fixed bounds.
    #[error("range error: {0}")]
    Range(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Coarse error classes used for CLI exit codes and C status codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Input,
    Format,
    Parameter,
    Io,
}

impl ErrorClass {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorClass::Input => "input",
            ErrorClass::Format => "format",
            ErrorClass::Parameter => "parameter",
            ErrorClass::Io => "io",
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::Input => 3,
            ErrorClass::Format => 4,
            ErrorClass::Parameter => 5,
            ErrorClass::Io => 6,
        }
    }
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Input(_) | Error::Domain(_) | Error::Range(_) => ErrorClass::Input,
            Error::Format(_) => ErrorClass::Format,
            Error::Parameter(_) => ErrorClass::Parameter,
            Error::Io(_) => ErrorClass::Io,
        }
    }

    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }

    pub(crate) fn parameter(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        if err.is_io() {
            Error::Io(err.into())
        } else {
            Error::Format(err.to_string())
        }
    }
}
