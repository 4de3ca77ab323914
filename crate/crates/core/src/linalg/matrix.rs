use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Dense square complex matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix(CMatrix);

impl ComplexMatrix {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::NonSquare {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
            });
        }
        if matrix.nrows() == 0 {
            return Err(Error::Empty);
        }
        if matrix
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite);
        }
        Ok(Self(matrix))
    }

    /// Row-major entries.
    pub fn from_row_slice(dim: usize, entries: &[Complex64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                actual: entries.len(),
            });
        }
        Self::new(CMatrix::from_row_slice(dim, dim, entries))
    }

    /// Real matrix from row-major rows.
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let im: Vec<Vec<f64>> = rows.iter().map(|r| vec![0.0; r.len()]).collect();
        Self::from_parts(rows, &im)
    }

    /// Builds a matrix from separate real and imaginary row-major parts.
    pub fn from_parts(re: &[Vec<f64>], im: &[Vec<f64>]) -> Result<Self> {
        if re.len() != im.len() {
            return Err(Error::Parse(format!(
                "real part has {} rows, imaginary part has {}",
                re.len(),
                im.len()
            )));
        }
        let rows = re.len();
        let cols = re.first().map_or(0, Vec::len);
        for (i, (r, m)) in re.iter().zip(im).enumerate() {
            if r.len() != cols || m.len() != cols {
                return Err(Error::Parse(format!(
                    "row {i} has {} real and {} imaginary entries, expected {cols}",
                    r.len(),
                    m.len()
                )));
            }
        }
        let matrix = CMatrix::from_fn(rows, cols, |i, j| Complex64::new(re[i][j], im[i][j]));
        Self::new(matrix)
    }

    pub fn identity(dim: usize) -> Self {
        Self(CMatrix::identity(dim, dim))
    }

    pub fn from_diagonal(diagonal: &[Complex64]) -> Result<Self> {
        Self::new(CMatrix::from_diagonal(&CVector::from_column_slice(
            diagonal,
        )))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    /// `true` iff `‖A − A†‖ ≤ tol·‖A‖`.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        (&self.0 - self.0.adjoint()).norm() <= tol * self.norm()
    }
}

impl AsRef<CMatrix> for ComplexMatrix {
    fn as_ref(&self) -> &CMatrix {
        &self.0
    }
}

impl TryFrom<CMatrix> for ComplexMatrix {
    type Error = Error;

    fn try_from(matrix: CMatrix) -> Result<Self> {
        Self::new(matrix)
    }
}

pub(crate) fn check_dim(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, actual })
    }
}

/// On-disk matrix representation: `{"dim": n, "re": [[...]], "im": [[...]]}`, row-major.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixFile {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixFile {
    pub fn from_matrix(matrix: &ComplexMatrix) -> Self {
        let m = matrix.as_matrix();
        let n = matrix.dim();
        let rows = |f: fn(&Complex64) -> f64| {
            (0..n)
                .map(|i| (0..n).map(|j| f(&m[(i, j)])).collect())
                .collect()
        };
        Self {
            dim: n,
            re: rows(|z| z.re),
            im: rows(|z| z.im),
        }
    }

    pub fn into_matrix(self) -> Result<ComplexMatrix> {
        let rows = self.re.len();
        let cols = self.re.first().map_or(0, Vec::len);
        let ragged = self.re.iter().chain(&self.im).any(|r| r.len() != cols);
        if self.im.len() != rows || ragged {
            return Err(Error::Parse(
                "real and imaginary parts differ in shape".into(),
            ));
        }
        if rows != cols {
            return Err(Error::NonSquare { rows, cols });
        }
        if rows != self.dim {
            return Err(Error::Parse(format!(
                "declared dim {} but payload is {rows}x{cols}",
                self.dim
            )));
        }
        ComplexMatrix::from_parts(&self.re, &self.im)
    }
}

/// Parses the JSON matrix format.
pub fn parse_matrix(json: &str) -> Result<ComplexMatrix> {
    let file: MatrixFile = serde_json::from_str(json).map_err(|e| Error::Parse(e.to_string()))?;
    file.into_matrix()
}

pub fn matrix_to_json(matrix: &ComplexMatrix) -> String {
    serde_json::to_string_pretty(&MatrixFile::from_matrix(matrix))
        .expect("matrix file serialization is infallible")
}

/// Index of the largest-magnitude component; ties within a relative `1e-8` go to the lowest index.
pub(crate) fn dominant_index<'a>(components: impl Iterator<Item = &'a Complex64> + Clone) -> usize {
    let max = components.clone().map(|z| z.norm()).fold(0.0, f64::max);
    components
        .enumerate()
        .find(|(_, z)| z.norm() >= max * (1.0 - 1e-8))
        .map_or(0, |(i, _)| i)
}
