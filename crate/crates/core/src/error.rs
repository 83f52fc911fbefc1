use std::path::PathBuf;

use thiserror::Error;

use crate::expr::ParseError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("coefficient `{0}` must be strictly positive")]
    NonPositiveCoefficient(String),

    #[error("interface position L0 must satisfy 0 < L0 < L")]
    InterfaceOutOfRange,

    #[error("interface at x = {l0} does not coincide with a grid node (h = {h})")]
    InterfaceNotOnGrid { l0: f64, h: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("interface system for the {pair} pair is singular")]
    SingularInterfaceSystem { pair: &'static str },

    #[error("non-finite state detected at step {step} (t = {t})")]
    NonFiniteState { step: usize, t: f64 },

    #[error("zero pivot in tridiagonal solve at row {row}")]
    ZeroPivot { row: usize },

    #[error("energy balance needs at least two samples, got {0}")]
    InsufficientSamples(usize),

    #[error("heat sources h1/h2 must vanish for a Lyapunov/decay study")]
    HeatSourcePresent,

    #[error("expression `{source_text}`: {error}")]
    Expression {
        source_text: String,
        #[source]
        error: ParseError,
    },

    #[error("{path}:{line}: {message}")]
    ConfigSyntax {
        path: String,
        line: usize,
        message: String,
    },

    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),

    #[error("missing configuration key `{0}`")]
    MissingKey(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("refusing to write non-finite value to {0}")]
    NonFiniteOutput(PathBuf),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NonFiniteState { .. } | Error::NonFiniteOutput(_) => 3,
            Error::ZeroPivot { .. } | Error::SingularInterfaceSystem { .. } => 3,
            Error::Io { .. } => 4,
            _ => 2,
        }
    }
}
