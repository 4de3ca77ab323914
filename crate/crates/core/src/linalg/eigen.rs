use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::matrix::{dominant_index, CMatrix, CVector, ComplexMatrix, ONE, ZERO};
use crate::error::{Error, Result};

/// Numerical thresholds for one eigendecomposition.
///
/// `eig` and `deg` are absolute (already scaled by the operator norm); `bio` is a
/// dimensionless bound on normalized overlaps `|⟨L|R⟩|/(‖L‖‖R‖)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceSet {
    pub eig: f64,
    pub bio: f64,
    pub deg: f64,
    pub solve: f64,
}

impl ToleranceSet {
    pub const EIG_RELATIVE: f64 = 1e-10;
    pub const BIO: f64 = 1e-10;
    pub const DEG_RELATIVE: f64 = 1e-8;
    pub const SOLVE: f64 = 1e-12;

    pub fn for_norm(norm: f64) -> Self {
        Self {
            eig: Self::EIG_RELATIVE * norm,
            bio: Self::BIO,
            deg: Self::DEG_RELATIVE * norm,
            solve: Self::SOLVE,
        }
    }

    pub fn for_matrix(h: &ComplexMatrix) -> Self {
        Self::for_norm(h.norm())
    }
}

/// Eigenvalues with paired right and left eigenvectors of a non-defective operator.
///
/// Column `n` of `right` solves `H R = E R`, column `n` of `left` solves `H† L = E* L`,
/// and `⟨L_m|R_n⟩ = 0` for `m ≠ n`. Eigenvalues are sorted by (real, imaginary) part.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem {
    eigenvalues: Vec<Complex64>,
    right: CMatrix,
    left: CMatrix,
    pairing_residual: f64,
    operator_norm: f64,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.eigenvalues
    }

    pub fn eigenvalue(&self, n: usize) -> Complex64 {
        self.eigenvalues[n]
    }

    /// Right eigenvectors as columns.
    pub fn right_vectors(&self) -> &CMatrix {
        &self.right
    }

    /// Left eigenvectors as columns.
    pub fn left_vectors(&self) -> &CMatrix {
        &self.left
    }

    pub fn right(&self, n: usize) -> CVector {
        self.right.column(n).into_owned()
    }

    pub fn left(&self, n: usize) -> CVector {
        self.left.column(n).into_owned()
    }

    /// `⟨L_n|R_n⟩`.
    pub fn overlap(&self, n: usize) -> Complex64 {
        self.left.column(n).dotc(&self.right.column(n))
    }

    /// Largest normalized deviation of `⟨L_m|R_n⟩` from `δ_mn ⟨L_n|R_n⟩`.
    pub fn pairing_residual(&self) -> f64 {
        self.pairing_residual
    }

    /// Frobenius norm of the operator this system was computed from.
    pub fn operator_norm(&self) -> f64 {
        self.operator_norm
    }

    /// `Σ E_n |R_n⟩⟨L_n| / ⟨L_n|R_n⟩`.
    pub fn reconstruct(&self) -> CMatrix {
        let n = self.dim();
        let mut out = CMatrix::zeros(n, n);
        for k in 0..n {
            let weight = self.eigenvalues[k] / self.overlap(k);
            out += self.right.column(k) * self.left.column(k).adjoint() * weight;
        }
        out
    }

    /// Rescales `R_n → r_n R_n` and `L_n → l_n L_n` independently.
    pub fn rescale(&self, right_scales: &[Complex64], left_scales: &[Complex64]) -> Result<Self> {
        let n = self.dim();
        super::matrix::check_dim(n, right_scales.len())?;
        super::matrix::check_dim(n, left_scales.len())?;
        for (index, c) in right_scales.iter().chain(left_scales).enumerate() {
            if *c == ZERO {
                return Err(Error::ZeroScale { index: index % n });
            }
        }
        let mut out = self.clone();
        for k in 0..n {
            out.right.column_mut(k).scale_mut_complex(right_scales[k]);
            out.left.column_mut(k).scale_mut_complex(left_scales[k]);
        }
        Ok(out)
    }

    /// Gauge transformation `R_n → c_n R_n`, `L_n → (c_n*)⁻¹ L_n`, preserving every `⟨L_n|R_n⟩`.
    pub fn gauge_transform(&self, scales: &[Complex64]) -> Result<Self> {
        if let Some(index) = scales.iter().position(|c| *c == ZERO) {
            return Err(Error::ZeroScale { index });
        }
        let left: Vec<Complex64> = scales.iter().map(|c| ONE / c.conj()).collect();
        self.rescale(scales, &left)
    }

    /// Reorders eigenpairs so that entry `k` of the result is entry `order[k]` of `self`.
    pub(crate) fn permuted(&self, order: &[usize]) -> Self {
        let n = self.dim();
        Self {
            eigenvalues: order.iter().map(|&i| self.eigenvalues[i]).collect(),
            right: CMatrix::from_fn(n, n, |r, c| self.right[(r, order[c])]),
            left: CMatrix::from_fn(n, n, |r, c| self.left[(r, order[c])]),
            pairing_residual: self.pairing_residual,
            operator_norm: self.operator_norm,
        }
    }
}

trait ScaleComplex {
    fn scale_mut_complex(&mut self, c: Complex64);
}

impl<S> ScaleComplex for nalgebra::Matrix<Complex64, nalgebra::Dyn, nalgebra::U1, S>
where
    S: nalgebra::StorageMut<Complex64, nalgebra::Dyn, nalgebra::U1>,
{
    fn scale_mut_complex(&mut self, c: Complex64) {
        for z in self.iter_mut() {
            *z *= c;
        }
    }
}

fn lexicographic(a: &Complex64, b: &Complex64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

const BALANCE_MAX_ITERATIONS: usize = 100;
const BALANCE_MAX_LOG_SCALE: f64 = 64.0;
const BALANCE_MAX_STEP: f64 = 8.0;
const BALANCE_GRADIENT_TOL: f64 = 1e-9;

/// Log-scales `x` minimizing the off-diagonal Frobenius norm of `D⁻¹ A D`, `D = diag(eˣ)`.
///
/// This is 2-norm balancing solved by damped Newton iteration on the convex objective
/// `Σ_{i≠j} |a_ij|² e^{2(x_j − x_i)}`. At the optimum every row and column of the
/// balanced matrix have equal off-diagonal norms, which removes the diagonal-scaling part of
/// the non-normality (the dominant part for lattice models with asymmetric hopping).
fn balancing_log_scales(a: &CMatrix) -> DVector<f64> {
    let n = a.nrows();
    let mut links: Vec<(usize, usize, f64)> = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let w = a[(i, j)].norm_sqr();
            if i != j && w > 0.0 {
                links.push((i, j, w));
            }
        }
    }
    let mut x = DVector::zeros(n);
    let total: f64 = links.iter().map(|l| l.2).sum();
    if total == 0.0 || !total.is_finite() {
        return x;
    }
    for link in &mut links {
        link.2 /= total;
    }
    let objective = |x: &DVector<f64>| -> f64 {
        links
            .iter()
            .map(|&(i, j, w)| w * (2.0 * (x[j] - x[i])).exp())
            .sum()
    };

    for _ in 0..BALANCE_MAX_ITERATIONS {
        // col[k]/row[k]: squared off-diagonal column/row norms of the balanced matrix.
        let mut col = DVector::<f64>::zeros(n);
        let mut row = DVector::<f64>::zeros(n);
        let mut hessian = DMatrix::<f64>::zeros(n, n);
        for &(i, j, w) in &links {
            let e = w * (2.0 * (x[j] - x[i])).exp();
            col[j] += e;
            row[i] += e;
            hessian[(i, j)] -= 4.0 * e;
            hessian[(j, i)] -= 4.0 * e;
        }
        let imbalance = (0..n)
            .filter(|&k| col[k] + row[k] > 0.0)
            .map(|k| (col[k] - row[k]).abs() / (col[k] + row[k]))
            .fold(0.0, f64::max);
        if imbalance < BALANCE_GRADIENT_TOL {
            break;
        }
        let gradient = (&col - &row) * 2.0;
        let trace: f64 = (0..n).map(|k| 4.0 * (col[k] + row[k])).sum();
        for k in 0..n {
            hessian[(k, k)] = 4.0 * (col[k] + row[k]) + 1e-12 * trace + f64::MIN_POSITIVE;
        }
        let mut step = match hessian.cholesky() {
            Some(ch) => -ch.solve(&gradient),
            None => -gradient.clone(),
        };
        let largest = step.amax();
        if largest > BALANCE_MAX_STEP {
            step *= BALANCE_MAX_STEP / largest;
        }
        let f0 = objective(&x);
        let slope = gradient.dot(&step);
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial =
                (&x + &step * t).map(|v| v.clamp(-BALANCE_MAX_LOG_SCALE, BALANCE_MAX_LOG_SCALE));
            if objective(&trial) <= f0 + 1e-4 * t * slope {
                accepted = Some(trial);
                break;
            }
            t *= 0.5;
        }
        match accepted {
            Some(trial) if (&trial - &x).amax() > 1e-14 => x = trial,
            _ => break,
        }
    }
    x
}

struct BalancedSchur {
    log_scales: DVector<f64>,
    q: CMatrix,
    t: CMatrix,
}

fn balanced_schur(h: &CMatrix) -> Result<BalancedSchur> {
    let n = h.nrows();
    let log_scales = balancing_log_scales(h);
    let d = log_scales.map(f64::exp);
    let balanced = CMatrix::from_fn(n, n, |i, j| h[(i, j)] * (d[j] / d[i]));
    let super::schur::Schur { z, t } = super::schur::schur(&balanced)?;
    Ok(BalancedSchur {
        log_scales,
        q: z,
        t,
    })
}

/// Eigenvalues only, sorted by (real, imaginary) part. No non-degeneracy requirement.
pub fn eigenvalues(h: &ComplexMatrix) -> Result<Vec<Complex64>> {
    let bs = balanced_schur(h.as_matrix())?;
    let mut values: Vec<Complex64> = bs.t.diagonal().iter().copied().collect();
    values.sort_by(lexicographic);
    Ok(values)
}

/// Eigenvectors of an upper-triangular matrix, as columns of an upper-triangular matrix with
/// unit diagonal (up to overflow rescaling).
fn triangular_eigenvectors(t: &CMatrix) -> CMatrix {
    let n = t.nrows();
    let smin = (f64::EPSILON * t.norm()).max(f64::MIN_POSITIVE);
    let mut y = CMatrix::zeros(n, n);
    for k in 0..n {
        let lambda = t[(k, k)];
        y[(k, k)] = ONE;
        for i in (0..k).rev() {
            let mut s = ZERO;
            for j in i + 1..=k {
                s += t[(i, j)] * y[(j, k)];
            }
            let mut d = t[(i, i)] - lambda;
            if d.norm() < smin {
                d = Complex64::new(smin, 0.0);
            }
            y[(i, k)] = -s / d;
            if y[(i, k)].norm() > 1e100 {
                for r in i..=k {
                    y[(r, k)] *= 1e-100;
                }
            }
        }
    }
    y
}

/// Rejects spectra with eigenvalues closer than `tol.deg`, classifying each cluster as
/// degenerate (full eigenspace) or defective (missing eigenvectors).
fn check_separation(h: &CMatrix, sorted: &[Complex64], tol: &ToleranceSet) -> Result<()> {
    let n = sorted.len();
    for i in 0..n {
        for j in i + 1..n {
            let separation = (sorted[i] - sorted[j]).norm();
            if separation > tol.deg {
                continue;
            }
            let cluster: Vec<usize> = (0..n)
                .filter(|&k| {
                    (sorted[k] - sorted[i]).norm() <= tol.deg
                        || (sorted[k] - sorted[j]).norm() <= tol.deg
                })
                .collect();
            let center =
                cluster.iter().map(|&k| sorted[k]).sum::<Complex64>() / cluster.len() as f64;
            let shifted = h - CMatrix::identity(n, n) * center;
            let null_dim = shifted
                .singular_values()
                .iter()
                .filter(|&&s| s <= tol.deg)
                .count();
            if null_dim < cluster.len() {
                return Err(Error::DefectiveOperator {
                    index: i,
                    overlap: 0.0,
                });
            }
            return Err(Error::DegenerateSpectrum {
                first: i,
                second: j,
                separation,
                threshold: tol.deg,
            });
        }
    }
    Ok(())
}

/// Computes eigenvalues with paired right and left eigenvectors.
///
/// The operator is balanced by a diagonal similarity, reduced to complex Schur form, and the
/// right eigenvectors are back-substituted from the triangular factor. Left eigenvectors are the
/// conjugated rows of the inverse right-eigenvector matrix, so `⟨L_m|R_n⟩ = δ_mn` holds at working
/// precision. Right vectors come out with unit norm and their largest component real positive.
pub fn eigendecompose(h: &ComplexMatrix, tol: &ToleranceSet) -> Result<EigenSystem> {
    let a = h.as_matrix();
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    let n = h.dim();
    let BalancedSchur { log_scales, q, t } = balanced_schur(a)?;

    let raw: Vec<Complex64> = t.diagonal().iter().copied().collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| lexicographic(&raw[i], &raw[j]));
    let sorted: Vec<Complex64> = order.iter().map(|&i| raw[i]).collect();
    check_separation(a, &sorted, tol)?;

    let y = triangular_eigenvectors(&t);
    let y_inv = y
        .solve_upper_triangular(&CMatrix::identity(n, n))
        .ok_or(Error::SingularMatrix)?;
    // Balanced right vectors (columns) and their dual rows: duals * vectors = I.
    let vectors = &q * &y;
    let duals = &y_inv * q.adjoint();

    for (k, &src) in order.iter().enumerate() {
        let overlap = 1.0 / (vectors.column(src).norm() * duals.row(src).norm());
        if overlap < tol.bio {
            return Err(Error::DefectiveOperator { index: k, overlap });
        }
    }

    let d = log_scales.map(f64::exp);
    let mut right = CMatrix::zeros(n, n);
    let mut left = CMatrix::zeros(n, n);
    for (k, &src) in order.iter().enumerate() {
        let mut r = CVector::from_fn(n, |i, _| vectors[(i, src)] * d[i]);
        let p = r[dominant_index(r.iter())];
        let s = (p.conj() / p.norm()) / r.norm();
        r *= s;
        // Dual row of D·v is (row of duals)·D⁻¹; rescaling r by s rescales the dual by 1/s.
        let l = CVector::from_fn(n, |i, _| (duals[(src, i)] / d[i] / s).conj());
        right.set_column(k, &r);
        left.set_column(k, &l);
    }

    let mut system = EigenSystem {
        eigenvalues: sorted,
        right,
        left,
        pairing_residual: 0.0,
        operator_norm: h.norm(),
    };
    system.pairing_residual = pairing_residual(&system);
    validate(&system, a, tol)?;
    Ok(system)
}

fn pairing_residual(es: &EigenSystem) -> f64 {
    let n = es.dim();
    let overlaps = es.left.adjoint() * &es.right;
    let mut worst: f64 = 0.0;
    for m in 0..n {
        let lnorm = es.left.column(m).norm();
        for k in 0..n {
            if m == k {
                continue;
            }
            worst = worst.max(overlaps[(m, k)].norm() / (lnorm * es.right.column(k).norm()));
        }
    }
    worst
}

fn validate(es: &EigenSystem, h: &CMatrix, tol: &ToleranceSet) -> Result<()> {
    let h_adj = h.adjoint();
    let mut residual: f64 = 0.0;
    for k in 0..es.dim() {
        let e = es.eigenvalues[k];
        let r = es.right.column(k);
        let l = es.left.column(k);
        residual = residual.max((h * r - r * e).norm() / r.norm());
        residual = residual.max((&h_adj * l - l * e.conj()).norm() / l.norm());
    }
    if residual > tol.eig {
        return Err(Error::InaccurateEigensystem {
            residual,
            tolerance: tol.eig,
        });
    }
    if es.pairing_residual > tol.bio {
        return Err(Error::InaccurateEigensystem {
            residual: es.pairing_residual,
            tolerance: tol.bio,
        });
    }
    Ok(())
}

impl ComplexMatrix {
    /// Eigendecomposition with tolerances scaled to this matrix.
    pub fn eigensystem(&self) -> Result<EigenSystem> {
        eigendecompose(self, &ToleranceSet::for_matrix(self))
    }
}
