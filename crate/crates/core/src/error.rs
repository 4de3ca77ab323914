use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("matrix must be square, got {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },
    #[error("matrix must have dimension at least 1")]
    Empty,
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("eigenvalues {first} and {second} are closer than {threshold:e} (separation {separation:e})")]
    DegenerateSpectrum {
        first: usize,
        second: usize,
        separation: f64,
        threshold: f64,
    },
    #[error("operator is defective at eigenvalue index {index} (normalized overlap {overlap:e})")]
    DefectiveOperator { index: usize, overlap: f64 },
    #[error("eigendecomposition residual {residual:e} exceeds tolerance {tolerance:e}")]
    InaccurateEigensystem { residual: f64, tolerance: f64 },
    #[error("Schur iteration did not converge")]
    NoConvergence,
    #[error("matrix is singular at working precision")]
    SingularMatrix,
    #[error("gauge scale at index {index} is zero")]
    ZeroScale { index: usize },
    #[error("state vector is zero")]
    ZeroVector,
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("metric coefficient {index} is not positive ({value})")]
    NonPositiveCoefficient { index: usize, value: f64 },
    #[error("metric matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("amplitudes are not normalized: sum of squares is {norm_sq}")]
    NotNormalized { norm_sq: f64 },
    #[error("spectra differ: eigenvalue {index} has no partner within {threshold:e} (nearest {distance:e})")]
    SpectraMismatch {
        index: usize,
        distance: f64,
        threshold: f64,
    },
    #[error("norm-matching system is singular")]
    SingularSystem,
    #[error("lattice needs at least 2 sites, got {sites}")]
    InvalidSize { sites: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("table does not match the expectation-sweep schema: {0}")]
    SchemaMismatch(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
