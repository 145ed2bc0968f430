//! Error types shared across the simulation library.

use std::fmt;
use std::io;
use std::path::PathBuf;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by the simulation library.
#[derive(Debug)]
pub enum Error {
    /// A parameter violated an operation's precondition.
    InvalidParameter(String),
    /// Segment query with coincident endpoints.
    DegenerateSegment,
    /// No specular reflection geometry exists for the queried points.
    NoSpecularPath(String),
    /// A grid or sample file could not be parsed; `line` is 1-based.
    GridFormat {
        path: PathBuf,
        line: usize,
        message: String,
    },
    /// A grid file contained no data rows.
    NoValidCells(PathBuf),
    /// Cell index outside the grid bounds or masked out.
    CellOutOfBounds { row: usize, col: usize },
    /// Artifacts built over different grid specs were combined.
    SpecMismatch(String),
    /// A position does not map to a valid grid cell.
    OutOfCoverage {
        user: Option<usize>,
        x: f64,
        y: f64,
    },
    /// CCDF curves with different threshold lists were compared.
    MismatchedThresholds,
    /// A statistic was requested over an empty sample set.
    EmptySamples,
    /// Configuration file error.
    Config(String),
    /// I/O failure with path context.
    Io { path: PathBuf, source: io::Error },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::DegenerateSegment => {
                write!(f, "degenerate segment: endpoints coincide")
            }
            Error::NoSpecularPath(msg) => write!(f, "no specular path: {msg}"),
            Error::GridFormat {
                path,
                line,
                message,
            } => write!(f, "{}:{line}: {message}", path.display()),
            Error::NoValidCells(path) => {
                write!(f, "{}: no valid cells", path.display())
            }
            Error::CellOutOfBounds { row, col } => {
                write!(f, "cell ({row}, {col}) is out of bounds or masked out")
            }
            Error::SpecMismatch(msg) => write!(f, "grid spec mismatch: {msg}"),
            Error::OutOfCoverage { user, x, y } => match user {
                Some(i) => write!(f, "user {i} at ({x:.3}, {y:.3}) is out of grid coverage"),
                None => write!(f, "position ({x:.3}, {y:.3}) is out of grid coverage"),
            },
            Error::MismatchedThresholds => {
                write!(f, "CCDF curves have different threshold lists")
            }
            Error::EmptySamples => write!(f, "empty sample set"),
            Error::Config(msg) => write!(f, "config error: {msg}"),
            Error::Io { path, source } => write!(f, "{}: {source}", path.display()),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io { source, .. } => Some(source),
            _ => None,
        }
    }
}
