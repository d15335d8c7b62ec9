use std::path::PathBuf;

use thiserror::Error;

/// Everything that can go wrong inside the toolkit.
///
/// Variants are grouped by [`ErrorClass`] so the command-line front end can map
/// them onto stable exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("energy {energy_kev} keV outside table range [{lo_kev}, {hi_kev}] keV")]
    OutOfRange { energy_kev: f64, lo_kev: f64, hi_kev: f64 },

    #[error("degenerate run: {0}")]
    DegenerateRun(String),

    #[error("binning mismatch: {0}")]
    BinningMismatch(String),

    #[error("region of interest [{lo_kev}, {hi_kev}] keV: {reason}")]
    BadRoi { lo_kev: f64, hi_kev: f64, reason: String },

    #[error("size cap exceeded: {0}")]
    SizeCap(String),

    #[error("config line {line}: key `{key}`: {reason}")]
    Config { line: usize, key: String, reason: String },

    #[error("config: missing required key `{key}`")]
    MissingKey { key: String },

    #[error("{source_name} line {line}: {reason}")]
    Parse {
        source_name: String,
        line: usize,
        reason: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Coarse classification used for exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Io,
    Numeric,
}

impl ErrorClass {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::Config => 1,
            ErrorClass::Io => 2,
            ErrorClass::Numeric => 3,
        }
    }
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Config { .. } | Error::MissingKey { .. } => ErrorClass::Config,
            Error::Io { .. } | Error::Parse { .. } => ErrorClass::Io,
            Error::InvalidParameter { .. }
            | Error::OutOfRange { .. }
            | Error::DegenerateRun(_)
            | Error::BinningMismatch(_)
            | Error::BadRoi { .. }
            | Error::SizeCap(_) => ErrorClass::Numeric,
        }
    }

    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
