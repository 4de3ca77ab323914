use nalgebra::linalg::LU;
use nalgebra::{DVector, Dyn};
use num_complex::Complex64;

use super::matrix::{check_dim, CMatrix, CVector, ComplexMatrix};
use crate::error::{Error, Result};

/// Pivots smaller than this fraction of the largest pivot (after equilibration) mark the
/// matrix singular.
const PIVOT_RATIO_FLOOR: f64 = 1e-14;

/// LU factorization of a row/column-equilibrated square matrix, reusable across right-hand sides.
///
/// Equilibration keeps diagonally-scaled matrices (such as metrics of strongly
/// non-normal operators, whose entries span many decades) solvable.
#[derive(Debug, Clone)]
pub struct LinearSolver {
    matrix: CMatrix,
    row_scale: DVector<f64>,
    col_scale: DVector<f64>,
    lu: LU<Complex64, Dyn, Dyn>,
}

impl LinearSolver {
    pub fn new(a: &CMatrix) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::NonSquare {
                rows: a.nrows(),
                cols: a.ncols(),
            });
        }
        let n = a.nrows();
        let row_scale = DVector::from_fn(n, |i, _| {
            let max = a.row(i).iter().map(|z| z.norm()).fold(0.0, f64::max);
            if max > 0.0 {
                1.0 / max
            } else {
                0.0
            }
        });
        if row_scale.iter().any(|&s| s == 0.0 || !s.is_finite()) {
            return Err(Error::SingularMatrix);
        }
        let col_scale = DVector::from_fn(n, |j, _| {
            let max = (0..n)
                .map(|i| (a[(i, j)] * row_scale[i]).norm())
                .fold(0.0, f64::max);
            if max > 0.0 {
                1.0 / max
            } else {
                0.0
            }
        });
        if col_scale.iter().any(|&s| s == 0.0 || !s.is_finite()) {
            return Err(Error::SingularMatrix);
        }
        let scaled = CMatrix::from_fn(n, n, |i, j| a[(i, j)] * row_scale[i] * col_scale[j]);
        let lu = scaled.lu();
        let u = lu.u();
        let pivots = u.diagonal().map(|z| z.norm());
        let largest = pivots.max();
        if pivots.iter().any(|&p| p <= PIVOT_RATIO_FLOOR * largest) {
            return Err(Error::SingularMatrix);
        }
        Ok(Self {
            matrix: a.clone(),
            row_scale,
            col_scale,
            lu,
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    fn solve_once(&self, b: &CVector) -> CVector {
        let rhs = b.component_mul(&self.row_scale.map(|s| Complex64::new(s, 0.0)));
        let y = self
            .lu
            .solve(&rhs)
            .expect("pivots were checked nonzero at factorization");
        y.component_mul(&self.col_scale.map(|s| Complex64::new(s, 0.0)))
    }

    /// Solves `A x = b` with one step of iterative refinement.
    pub fn solve(&self, b: &CVector) -> Result<CVector> {
        check_dim(self.dim(), b.len())?;
        let mut x = self.solve_once(b);
        let residual = b - &self.matrix * &x;
        x += self.solve_once(&residual);
        Ok(x)
    }

    /// Solves `A X = B` column by column.
    pub fn solve_matrix(&self, b: &CMatrix) -> Result<CMatrix> {
        check_dim(self.dim(), b.nrows())?;
        let mut out = CMatrix::zeros(b.nrows(), b.ncols());
        for (j, col) in b.column_iter().enumerate() {
            out.set_column(j, &self.solve(&col.into_owned())?);
        }
        Ok(out)
    }
}

pub fn solve_linear(a: &ComplexMatrix, b: &CVector) -> Result<CVector> {
    LinearSolver::new(a.as_matrix())?.solve(b)
}

/// 2-norm condition number from the singular values; `f64::INFINITY` for matrices that are
/// singular at working precision.
pub fn condition_estimate(a: &ComplexMatrix) -> f64 {
    let sv = a.as_matrix().clone().singular_values();
    let max = sv.max();
    let min = sv.min();
    if max == 0.0 || min <= max * f64::EPSILON * a.dim() as f64 {
        f64::INFINITY
    } else {
        max / min
    }
}
