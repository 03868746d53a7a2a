use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: axis {axis_a} of a has length {len_a}, axis {axis_b} of b has length {len_b}")]
    Dimension {
        axis_a: usize,
        len_a: usize,
        axis_b: usize,
        len_b: usize,
    },

    #[error("index error: {0}")]
    Index(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("numerical failure on {rows}x{cols} matrix: {reason}")]
    Numerical {
        rows: usize,
        cols: usize,
        reason: String,
    },

    #[error("non-finite energy at parameters {parameters:?}")]
    NonFiniteEnergy { parameters: Vec<f64> },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("two-qubit gate on non-adjacent qubits {0} and {1}; route the circuit first")]
    RoutingRequired(usize, usize),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("SCF did not converge in {cycles} cycles (last residual {residual:e})")]
    Scf { cycles: usize, residual: f64 },

    #[error("embedding error: {0}")]
    Embedding(String),

    #[error("optimizer failed: {0}")]
    Optimizer(String),

    #[error("eigensolver did not converge: {0}")]
    Eigensolver(String),

    #[error("i/o error on {path}: {source}")]
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
}
