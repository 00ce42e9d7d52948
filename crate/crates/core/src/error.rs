use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: line {line}: {message}")]
    Parse {
        context: String,
        line: usize,
        message: String,
    },

    /// The input mesh violates a structural invariant (manifoldness, degenerate
    /// elements, out-of-range indices, ...).
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("materializing a {rows}-row product operator exceeds the cap of {cap} rows")]
    MaterializationCap { rows: usize, cap: usize },

    #[error("eigensolver did not converge after {iterations} cycles; worst residual {worst_residual:.3e} (tolerance {tolerance:.1e})")]
    NotConverged {
        iterations: usize,
        worst_residual: f64,
        tolerance: f64,
        residuals: Vec<f64>,
    },

    #[error("linear algebra failure: {0}")]
    Factorization(String),

    #[error("basis provenance {got} not accepted here (expected {expected})")]
    Provenance { expected: &'static str, got: String },

    #[error("{0}")]
    Refinement(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(context: impl Into<String>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            context: context.into(),
            line,
            message: message.into(),
        }
    }

    pub(crate) fn dims(what: &'static str, expected: usize, got: usize) -> Self {
        Error::DimensionMismatch {
            what,
            expected,
            got,
        }
    }

    /// True for failures of the numerical solvers, as opposed to bad input data.
    pub fn is_solver_failure(&self) -> bool {
        matches!(self, Error::NotConverged { .. } | Error::Factorization(_))
    }
}
