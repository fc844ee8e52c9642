use thiserror::Error;

/// Errors raised by the numerical routines.
///
/// Each variant maps onto one CLI exit code class: parameter problems,
/// budget/size problems and I/O failures are kept distinct.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("size error: {0}")]
    Size(String),
    #[error("empty family: {0}")]
    EmptyFamily(String),
    #[error("aliasing: grid size {n} must exceed sum length {x}")]
    Aliasing { n: usize, x: usize },
    #[error("parameter out of range: {0}")]
    Parameter(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("arcs {first} and {second} overlap")]
    Overlap { first: String, second: String },
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Process exit code for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parameter(_) | Error::Domain(_) | Error::EmptyFamily(_) | Error::Aliasing { .. } | Error::Overlap { .. } => 2,
            Error::Size(_) | Error::Budget(_) => 3,
            Error::Io(_) => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Error::Size(_) => "size",
            Error::EmptyFamily(_) => "empty_family",
            Error::Aliasing { .. } => "aliasing",
            Error::Parameter(_) => "parameter",
            Error::Domain(_) => "domain",
            Error::Budget(_) => "budget",
            Error::Overlap { .. } => "overlap",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
