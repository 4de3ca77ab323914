//! Gram-matrix inner products `(u, v)_G = ⟨u|G|v⟩` built from the left eigenvectors of an operator.

use nalgebra::{Cholesky, DVector, Dyn};
use num_complex::Complex64;

use crate::biortho::StateVector;
use crate::error::{Error, Result};
use crate::linalg::{check_dim, CMatrix, CVector, ComplexMatrix, EigenSystem, ToleranceSet};

/// Default relative tolerance for [`GramMetric::is_self_adjoint`].
pub const SELF_ADJOINT_TOL: f64 = 1e-8;

/// Hermitian positive-definite `G = Σ g_n |L_n⟩⟨L_n|`.
///
/// Solves against `G` go through a Cholesky factor of the diagonally equilibrated matrix
/// `D G D`, `D = diag(G_kk^{-1/2})`; `G⁻¹` is never formed.
#[derive(Debug, Clone)]
pub struct GramMetric {
    matrix: CMatrix,
    coefficients: Vec<f64>,
    source: EigenSystem,
    equilibration: DVector<f64>,
    cholesky: Cholesky<Complex64, Dyn>,
}

/// `g_n = ⟨R_n|R_n⟩ / |⟨L_n|R_n⟩|²`, the choice that makes `G = Σ P_n† P_n`.
pub fn canonical_coefficients(es: &EigenSystem) -> Vec<f64> {
    (0..es.dim())
        .map(|n| es.right(n).norm_squared() / es.overlap(n).norm_sqr())
        .collect()
}

/// `Σ g_n |L_n⟩⟨L_n|` without any positivity checks.
pub(crate) fn gram_matrix(es: &EigenSystem, g: &[f64]) -> Result<CMatrix> {
    check_dim(es.dim(), g.len())?;
    let left = es.left_vectors();
    let weighted = CMatrix::from_fn(es.dim(), es.dim(), |r, c| left[(r, c)] * g[c]);
    let m = weighted * left.adjoint();
    Ok((&m + m.adjoint()).scale(0.5))
}

/// Spectral projectors `P_n = |R_n⟩⟨L_n| / ⟨L_n|R_n⟩`.
pub fn projectors(es: &EigenSystem) -> Vec<ComplexMatrix> {
    (0..es.dim())
        .map(|n| {
            let p = es.right(n) * es.left(n).adjoint() / es.overlap(n);
            ComplexMatrix::new(p).expect("projector of a validated eigensystem is finite")
        })
        .collect()
}

/// `Σ c_n |R_n⟩/‖R_n‖` for amplitudes with `Σ |c_n|² = 1`.
pub fn represent_state(es: &EigenSystem, c: &[Complex64]) -> Result<StateVector> {
    check_dim(es.dim(), c.len())?;
    let norm_sq: f64 = c.iter().map(|z| z.norm_sqr()).sum();
    if (norm_sq - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized { norm_sq });
    }
    let mut v = CVector::zeros(es.dim());
    for (n, cn) in c.iter().enumerate() {
        let r = es.right_vectors().column(n);
        v += r * (*cn / r.norm());
    }
    StateVector::new(v)
}

/// `c_n = (R_n, v)_G / √(R_n, R_n)_G` under the canonical metric.
pub fn amplitudes(es: &EigenSystem, v: &StateVector) -> Result<CVector> {
    amplitudes_with(es, &canonical_coefficients(es), v)
}

/// Evaluated in the eigenbasis, where `G` is diagonal:
/// `c_n = √g_n · (⟨L_n|R_n⟩*/|⟨L_n|R_n⟩|) · ⟨L_n|v⟩`.
fn amplitudes_with(es: &EigenSystem, g: &[f64], v: &StateVector) -> Result<CVector> {
    check_dim(es.dim(), v.dim())?;
    let projections = es.left_vectors().adjoint() * v.as_vector();
    Ok(CVector::from_fn(es.dim(), |n, _| {
        let o = es.overlap(n);
        projections[n] * (o.conj() / o.norm()) * g[n].sqrt()
    }))
}

impl GramMetric {
    pub fn canonical(es: &EigenSystem) -> Result<Self> {
        Self::general(es, &canonical_coefficients(es))
    }

    pub fn general(es: &EigenSystem, g: &[f64]) -> Result<Self> {
        check_dim(es.dim(), g.len())?;
        if let Some((index, &value)) = g
            .iter()
            .enumerate()
            .find(|(_, x)| !(**x > 0.0 && x.is_finite()))
        {
            return Err(Error::NonPositiveCoefficient { index, value });
        }
        let matrix = gram_matrix(es, g)?;
        let diag: Vec<f64> = (0..es.dim()).map(|k| matrix[(k, k)].re).collect();
        if diag.iter().any(|d| !d.is_finite() || *d <= 0.0) {
            return Err(Error::NotPositiveDefinite);
        }
        let equilibration =
            DVector::from_iterator(diag.len(), diag.iter().map(|d| d.sqrt().recip()));
        let scaled = CMatrix::from_fn(es.dim(), es.dim(), |r, c| {
            matrix[(r, c)] * (equilibration[r] * equilibration[c])
        });
        let cholesky = Cholesky::new(scaled).ok_or(Error::NotPositiveDefinite)?;
        Ok(Self {
            matrix,
            coefficients: g.to_vec(),
            source: es.clone(),
            equilibration,
            cholesky,
        })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn source(&self) -> &EigenSystem {
        &self.source
    }

    pub fn dim(&self) -> usize {
        self.coefficients.len()
    }

    /// `‖R_n‖_G² = g_n |⟨L_n|R_n⟩|²`, exact by construction.
    pub fn eigenvector_norm_sq(&self, n: usize) -> f64 {
        self.coefficients[n] * self.source.overlap(n).norm_sqr()
    }

    /// Smallest eigenvalue of `G`.
    pub fn min_eigenvalue(&self) -> f64 {
        self.matrix
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest deviation from G-orthogonality, `max_{k≠l} |⟨R_k|G|R_l⟩| / (‖R_k‖_G ‖R_l‖_G)`.
    pub fn stationarity_residual(&self) -> f64 {
        let r = self.source.right_vectors();
        let gram = r.adjoint() * &self.matrix * r;
        let mut worst: f64 = 0.0;
        for k in 0..self.dim() {
            for l in 0..self.dim() {
                if k != l {
                    let scale = (gram[(k, k)].re * gram[(l, l)].re).sqrt();
                    worst = worst.max(gram[(k, l)].norm() / scale);
                }
            }
        }
        worst
    }

    /// `G x = b`.
    pub fn solve(&self, b: &CMatrix) -> Result<CMatrix> {
        check_dim(self.dim(), b.nrows())?;
        let d = &self.equilibration;
        let scaled = CMatrix::from_fn(b.nrows(), b.ncols(), |r, c| b[(r, c)] * d[r]);
        let x = self.cholesky.solve(&scaled);
        Ok(CMatrix::from_fn(x.nrows(), x.ncols(), |r, c| {
            x[(r, c)] * d[r]
        }))
    }

    pub fn inner(&self, u: &StateVector, v: &StateVector) -> Result<Complex64> {
        check_dim(self.dim(), u.dim())?;
        check_dim(self.dim(), v.dim())?;
        Ok(u.as_vector().dotc(&(&self.matrix * v.as_vector())))
    }

    /// `⟨v|GQ|v⟩ / ⟨v|G|v⟩`.
    pub fn expectation(&self, q: &ComplexMatrix, v: &StateVector) -> Result<Complex64> {
        check_dim(self.dim(), q.dim())?;
        check_dim(self.dim(), v.dim())?;
        let x = v.as_vector();
        let gx = &self.matrix * x;
        Ok(gx.dotc(&(q.as_matrix() * x)) / gx.dotc(x))
    }

    /// `Q⋆ = G⁻¹ Q† G`.
    pub fn adjoint(&self, q: &ComplexMatrix) -> Result<ComplexMatrix> {
        check_dim(self.dim(), q.dim())?;
        let rhs = q.as_matrix().adjoint() * &self.matrix;
        ComplexMatrix::new(self.solve(&rhs)?)
    }

    /// `‖Q − Q⋆‖ ≤ tol·‖Q‖`.
    pub fn is_self_adjoint(&self, q: &ComplexMatrix, tol: f64) -> Result<bool> {
        let star = self.adjoint(q)?;
        Ok((q.as_matrix() - star.as_matrix()).norm() <= tol * q.norm())
    }

    /// `c_n = (R_n, v)_G / ‖R_n‖_G` for the source eigenvectors.
    pub fn amplitudes(&self, v: &StateVector) -> Result<CVector> {
        amplitudes_with(&self.source, &self.coefficients, v)
    }

    /// `|ṽ⟩ = G|v⟩`.
    pub fn associated_vector(&self, v: &StateVector) -> Result<StateVector> {
        check_dim(self.dim(), v.dim())?;
        StateVector::new(&self.matrix * v.as_vector())
    }

    /// Frobenius distance `‖G − I‖`.
    pub fn identity_deviation(&self) -> f64 {
        (&self.matrix - CMatrix::identity(self.dim(), self.dim())).norm()
    }
}

/// Eigendecomposition followed by the canonical metric, the usual entry point for a Hamiltonian.
pub fn canonical_metric_for(h: &ComplexMatrix) -> Result<GramMetric> {
    let es = crate::linalg::eigendecompose(h, &ToleranceSet::for_matrix(h))?;
    GramMetric::canonical(&es)
}
