//! Inner products and observables for non-Hermitian operators: biorthogonal bases,
//! Gram-matrix metrics, maps between equivalent representations, and a sweep CLI.

pub mod biortho;
pub mod cli;
pub mod error;
pub mod linalg;
pub mod metric;
pub mod models;
pub mod transport;

pub use biortho::{apply_gauge, BiorthogonalBasis, GaugeChoice, StateVector};
pub use error::{Error, Result};
pub use linalg::{eigendecompose, ComplexMatrix, EigenSystem, ToleranceSet};
pub use metric::GramMetric;
pub use transport::{build_map, HilbertMap, NormMatching};
