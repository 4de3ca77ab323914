//! Dense complex linear algebra: matrices, eigendecomposition with left/right pairing, and
//! equilibrated linear solves.

mod eigen;
mod matrix;
mod schur;
mod solve;

pub use eigen::{eigendecompose, eigenvalues, EigenSystem, ToleranceSet};
pub use matrix::{matrix_to_json, parse_matrix, CMatrix, CVector, ComplexMatrix, MatrixFile};
pub use solve::{condition_estimate, solve_linear, LinearSolver};

pub(crate) use matrix::{check_dim, dominant_index, ONE, ZERO};
