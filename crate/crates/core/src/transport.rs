//! Maps between two representations of the same physics, `H₂ = T H₁ T⁻¹`, and the
//! position-basis norm and overlap matching problem.

use num_complex::Complex64;

use crate::biortho::StateVector;
use crate::error::{Error, Result};
use crate::linalg::{check_dim, CMatrix, ComplexMatrix, EigenSystem, LinearSolver, ToleranceSet};
use crate::metric::{gram_matrix, GramMetric};

/// How well a built map satisfies its defining identities (all relative, Frobenius norms).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapResiduals {
    /// `‖T T⁻¹ − I‖`.
    pub inverse: f64,
    /// `max_n ‖T R₁ₙ − R₂ₙ‖ / ‖R₂ₙ‖` for G-normalized right eigenvectors.
    pub eigenvectors: f64,
    /// `‖G₁ − T† G₂ T‖ / ‖G₁‖`.
    pub metric: f64,
    /// Largest distance between paired eigenvalues.
    pub spectrum: f64,
}

/// `T = Σ_n |R₂ₙ⟩⟨L₁ₙ| / ⟨L₁ₙ|R₁ₙ⟩` between two eigensystems with equal spectra.
#[derive(Debug, Clone)]
pub struct HilbertMap {
    forward: ComplexMatrix,
    inverse: ComplexMatrix,
    source: EigenSystem,
    target: EigenSystem,
    source_metric: GramMetric,
    target_metric: GramMetric,
    residuals: MapResiduals,
}

/// Greedy nearest-neighbour pairing: entry `k` is the target index paired with source
/// eigenvalue `k`, together with the pair distance.
pub fn pair_eigenvalues(src: &EigenSystem, dst: &EigenSystem) -> Result<Vec<(usize, f64)>> {
    check_dim(src.dim(), dst.dim())?;
    let mut used = vec![false; dst.dim()];
    let mut pairs = Vec::with_capacity(src.dim());
    for e in src.eigenvalues() {
        let (best, distance) = dst
            .eigenvalues()
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, f)| (j, (e - f).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("dimensions checked equal");
        used[best] = true;
        pairs.push((best, distance));
    }
    Ok(pairs)
}

/// `τ_deg` for a pair of operators.
pub fn spectrum_threshold(src: &EigenSystem, dst: &EigenSystem) -> f64 {
    ToleranceSet::DEG_RELATIVE * src.operator_norm().max(dst.operator_norm())
}

fn pair_spectra(src: &EigenSystem, dst: &EigenSystem) -> Result<(Vec<usize>, f64)> {
    let threshold = spectrum_threshold(src, dst);
    let pairs = pair_eigenvalues(src, dst)?;
    if let Some((index, &(_, distance))) = pairs.iter().enumerate().find(|(_, p)| p.1 > threshold) {
        return Err(Error::SpectraMismatch {
            index,
            distance,
            threshold,
        });
    }
    let worst = pairs.iter().map(|p| p.1).fold(0.0, f64::max);
    Ok((pairs.into_iter().map(|p| p.0).collect(), worst))
}

pub fn build_map(source: &GramMetric, target: &GramMetric) -> Result<HilbertMap> {
    check_dim(source.dim(), target.dim())?;
    let (order, spectrum) = pair_spectra(source.source(), target.source())?;
    let n = source.dim();

    // Unit G-norm right vectors on both sides; source duals are kept as they are and
    // target duals are rescaled so that ⟨L₂ₙ|R₂ₙ⟩ = ⟨L₁ₙ|R₁ₙ⟩.
    let src = source.source();
    let dst = target.source();
    let src_right: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from(source.eigenvector_norm_sq(k).sqrt().recip()))
        .collect();
    let src_left = vec![Complex64::from(1.0); n];
    let src_norm = src.rescale(&src_right, &src_left)?;

    let dst_perm = dst.permuted(&order);
    let mut dst_right = Vec::with_capacity(n);
    let mut dst_left = Vec::with_capacity(n);
    for (k, &paired) in order.iter().enumerate() {
        let r = Complex64::from(target.eigenvector_norm_sq(paired).sqrt().recip());
        let overlap = dst_perm.overlap(k) * r;
        dst_right.push(r);
        dst_left.push((src_norm.overlap(k) / overlap).conj());
    }
    let dst_norm = dst_perm.rescale(&dst_right, &dst_left)?;

    let inv_overlaps = CMatrix::from_diagonal(&nalgebra::DVector::from_fn(n, |k, _| {
        Complex64::from(1.0) / src_norm.overlap(k)
    }));
    let forward = dst_norm.right_vectors() * &inv_overlaps * src_norm.left_vectors().adjoint();
    let inverse = src_norm.right_vectors() * &inv_overlaps * dst_norm.left_vectors().adjoint();

    let identity = CMatrix::identity(n, n);
    let g1 = source.matrix();
    let pulled_back = forward.adjoint() * target.matrix() * &forward;
    let eigenvectors = (0..n)
        .map(|k| {
            let r2 = dst_norm.right_vectors().column(k);
            (&forward * src_norm.right_vectors().column(k) - r2).norm() / r2.norm()
        })
        .fold(0.0, f64::max);
    let residuals = MapResiduals {
        inverse: (&forward * &inverse - &identity).norm(),
        eigenvectors,
        metric: (g1 - pulled_back).norm() / g1.norm(),
        spectrum,
    };

    Ok(HilbertMap {
        forward: ComplexMatrix::new(forward)?,
        inverse: ComplexMatrix::new(inverse)?,
        source: src_norm,
        target: dst_norm,
        source_metric: source.clone(),
        target_metric: target.clone(),
        residuals,
    })
}

impl HilbertMap {
    pub fn new(source: &GramMetric, target: &GramMetric) -> Result<Self> {
        build_map(source, target)
    }

    pub fn forward(&self) -> &ComplexMatrix {
        &self.forward
    }

    pub fn inverse(&self) -> &ComplexMatrix {
        &self.inverse
    }

    /// Source eigensystem with unit G-norm right vectors.
    pub fn source(&self) -> &EigenSystem {
        &self.source
    }

    /// Target eigensystem paired with the source order, unit G-norm right vectors.
    pub fn target(&self) -> &EigenSystem {
        &self.target
    }

    pub fn source_metric(&self) -> &GramMetric {
        &self.source_metric
    }

    pub fn target_metric(&self) -> &GramMetric {
        &self.target_metric
    }

    pub fn residuals(&self) -> MapResiduals {
        self.residuals
    }

    pub fn dim(&self) -> usize {
        self.forward.dim()
    }

    /// `T|v⟩`.
    pub fn transport_state(&self, v: &StateVector) -> Result<StateVector> {
        check_dim(self.dim(), v.dim())?;
        StateVector::new(self.forward.as_matrix() * v.as_vector())
    }

    /// `T Q T⁻¹`.
    pub fn transport_operator(&self, q: &ComplexMatrix) -> Result<ComplexMatrix> {
        check_dim(self.dim(), q.dim())?;
        ComplexMatrix::new(self.forward.as_matrix() * q.as_matrix() * self.inverse.as_matrix())
    }
}

/// Outcome of matching position-basis norms between two eigensystems.
#[derive(Debug, Clone, PartialEq)]
pub enum NormMatching {
    /// Every `g⁽²⁾ₙ > 0`: a valid inner product exists.
    Feasible(Vec<f64>),
    /// The linear system is solvable but some coefficients are not positive.
    Infeasible {
        coefficients: Vec<f64>,
        non_positive: Vec<usize>,
    },
}

impl NormMatching {
    pub fn coefficients(&self) -> &[f64] {
        match self {
            NormMatching::Feasible(g) => g,
            NormMatching::Infeasible { coefficients, .. } => coefficients,
        }
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self, NormMatching::Feasible(_))
    }
}

/// `⟨e_k|G|e_k⟩ = Σ_n g_n |⟨L_n|e_k⟩|²` for every computational basis vector.
pub fn position_norms(es: &EigenSystem, g: &[f64]) -> Result<Vec<f64>> {
    check_dim(es.dim(), g.len())?;
    let left = es.left_vectors();
    Ok((0..es.dim())
        .map(|k| (0..es.dim()).map(|n| g[n] * left[(k, n)].norm_sqr()).sum())
        .collect())
}

/// Finds `g⁽²⁾` giving every `|e_k⟩` the same norm under `G₂` as under `G₁`.
///
/// With `|e_k⟩ = Σ_n c_kn |R_n⟩`, `|c_kn ⟨L_n|R_n⟩|² = |⟨L_n|e_k⟩|²`, so the system is
/// `Σ_n |⟨L⁽²⁾_n|e_k⟩|² g⁽²⁾_n = ⟨e_k|G₁|e_k⟩`.
pub fn solve_norm_matching(
    src: &EigenSystem,
    g1: &[f64],
    dst: &EigenSystem,
) -> Result<NormMatching> {
    check_dim(src.dim(), dst.dim())?;
    let rhs = position_norms(src, g1)?;
    let n = dst.dim();
    let left = dst.left_vectors();
    let a = CMatrix::from_fn(n, n, |k, m| Complex64::from(left[(k, m)].norm_sqr()));
    let solver = LinearSolver::new(&a).map_err(|e| match e {
        Error::SingularMatrix => Error::SingularSystem,
        other => other,
    })?;
    let b = nalgebra::DVector::from_iterator(n, rhs.iter().map(|x| Complex64::from(*x)));
    let coefficients: Vec<f64> = solver.solve(&b)?.iter().map(|z| z.re).collect();
    let non_positive: Vec<usize> = (0..n)
        .filter(|&k| !coefficients[k].is_finite() || coefficients[k] <= 0.0)
        .collect();
    Ok(if non_positive.is_empty() {
        NormMatching::Feasible(coefficients)
    } else {
        NormMatching::Infeasible {
            coefficients,
            non_positive,
        }
    })
}

/// `max_{k≠l} |⟨e_k|G₁|e_l⟩ − ⟨e_k|G₂|e_l⟩|`; coefficients need not be positive.
pub fn overlap_residual(
    src: &EigenSystem,
    g1: &[f64],
    dst: &EigenSystem,
    g2: &[f64],
) -> Result<f64> {
    check_dim(src.dim(), dst.dim())?;
    let difference = gram_matrix(src, g1)? - gram_matrix(dst, g2)?;
    let n = src.dim();
    let mut worst: f64 = 0.0;
    for k in 0..n {
        for l in 0..n {
            if k != l {
                worst = worst.max(difference[(k, l)].norm());
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{amplitudes, canonical_coefficients};
    use crate::models::{hatano_nelson, HatanoNelsonSpec};

    fn real(dim: usize, rows: &[f64]) -> ComplexMatrix {
        ComplexMatrix::from_row_slice(
            dim,
            &rows.iter().map(|x| Complex64::from(*x)).collect::<Vec<_>>(),
        )
        .unwrap()
    }

    fn hn(sites: usize, gamma: f64) -> ComplexMatrix {
        hatano_nelson(&HatanoNelsonSpec::new(sites, gamma).unwrap()).unwrap()
    }

    fn canonical(h: &ComplexMatrix) -> GramMetric {
        GramMetric::canonical(&h.eigensystem().unwrap()).unwrap()
    }

    /// `S H S⁻¹` for diagonal `S`.
    fn similar(h: &ComplexMatrix, s: &[f64]) -> ComplexMatrix {
        let m = h.as_matrix();
        ComplexMatrix::new(CMatrix::from_fn(m.nrows(), m.ncols(), |r, c| {
            m[(r, c)] * (s[r] / s[c])
        }))
        .unwrap()
    }

    #[test]
    fn self_map_is_identity() {
        let g = canonical(&hn(5, 0.4));
        let map = build_map(&g, &g).unwrap();
        assert!((map.forward().as_matrix() - CMatrix::identity(5, 5)).norm() < 1e-10);
        let v = StateVector::site_sum(5, &[1, 2]).unwrap();
        assert!((map.transport_state(&v).unwrap().as_vector() - v.as_vector()).norm() < 1e-10);
    }

    #[test]
    fn permutation_of_diagonal_operator() {
        let h1 = real(3, &[1.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 3.0]);
        let h2 = real(3, &[3.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 2.0]);
        let map = build_map(&canonical(&h1), &canonical(&h2)).unwrap();
        // e₀ → e₁, e₁ → e₂, e₂ → e₀.
        let u = real(3, &[0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        assert!((map.forward().as_matrix() - u.as_matrix()).norm() < 1e-12);
        let moved = map.transport_operator(&h1).unwrap();
        assert!((moved.as_matrix() - h2.as_matrix()).norm() < 1e-12);
    }

    #[test]
    fn similarity_pair_preserves_metric_and_amplitudes() {
        let h1 = hn(2, 0.5);
        let r = (1.0f64 / 3.0).sqrt();
        let h2 = similar(&h1, &[r, r * r]);
        let (g1, g2) = (canonical(&h1), canonical(&h2));
        let map = build_map(&g1, &g2).unwrap();
        let res = map.residuals();
        assert!(res.inverse < 1e-12 && res.eigenvectors < 1e-12 && res.metric < 1e-12);
        let moved = map.transport_operator(&h1).unwrap();
        assert!((moved.as_matrix() - h2.as_matrix()).norm() < 1e-12);

        let v = StateVector::from_slice(&[Complex64::new(0.3, 1.0), Complex64::new(-2.0, 0.5)])
            .unwrap();
        let tv = map.transport_state(&v).unwrap();
        let a1 = amplitudes(g1.source(), &v).unwrap();
        let a2 = amplitudes(g2.source(), &tv).unwrap();
        assert!((a1 - a2).norm() < 1e-9);
        let e1 = g1.expectation(&h1, &v).unwrap();
        let e2 = g2.expectation(&moved, &tv).unwrap();
        assert!((e1 - e2).norm() < 1e-9);
    }

    #[test]
    fn normalized_eigenvectors_map_onto_each_other() {
        let h1 = hn(4, 0.3);
        let h2 = similar(&h1, &[1.0, 2.0, 0.5, 3.0]);
        let map = build_map(&canonical(&h1), &canonical(&h2)).unwrap();
        for n in 0..4 {
            let r1 = StateVector::new(map.source().right(n)).unwrap();
            let moved = map.transport_state(&r1).unwrap();
            assert!((moved.as_vector() - map.target().right(n)).norm() < 1e-10);
        }
    }

    #[test]
    fn different_spectra_are_rejected() {
        let a = canonical(&hn(4, 0.3));
        let b = canonical(&hn(4, 0.6));
        assert!(matches!(
            build_map(&a, &b),
            Err(Error::SpectraMismatch { .. })
        ));
        let c = canonical(&hn(3, 0.3));
        assert!(matches!(
            build_map(&a, &c),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    fn random_operator(dim: usize, seed: u64) -> ComplexMatrix {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let entries: Vec<Complex64> = (0..dim * dim)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        ComplexMatrix::from_row_slice(dim, &entries).unwrap()
    }

    #[test]
    fn norm_matching_identical_systems() {
        let es = random_operator(5, 1).eigensystem().unwrap();
        let g = canonical_coefficients(&es);
        let matched = solve_norm_matching(&es, &g, &es).unwrap();
        assert!(matched.is_feasible());
        for (x, y) in matched.coefficients().iter().zip(&g) {
            assert!((x - y).abs() < 1e-9 * y);
        }
        assert!(overlap_residual(&es, &g, &es, &g).unwrap() < 1e-15);
    }

    #[test]
    fn norm_matching_between_generic_operators() {
        let es1 = random_operator(4, 2).eigensystem().unwrap();
        let es2 = random_operator(4, 3).eigensystem().unwrap();
        let g1 = canonical_coefficients(&es1);
        let matched = solve_norm_matching(&es1, &g1, &es2).unwrap();
        let g2 = matched.coefficients();
        let before = position_norms(&es1, &g1).unwrap();
        let after = position_norms(&es2, g2).unwrap();
        for (a, b) in before.iter().zip(&after) {
            assert!((a - b).abs() < 1e-9 * a);
        }
        assert!(overlap_residual(&es1, &g1, &es2, g2).unwrap() > 1e-6);
    }

    #[test]
    fn norm_matching_permuted_hermitian_bases() {
        let h1 = real(3, &[1.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 3.0]);
        let h2 = real(3, &[3.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 2.0]);
        let (es1, es2) = (h1.eigensystem().unwrap(), h2.eigensystem().unwrap());
        let matched = solve_norm_matching(&es1, &[1.0, 2.0, 3.0], &es2).unwrap();
        // Eigenvalue 1 sits at site 1 of H₂, so its weight must carry site 1's norm.
        let g = matched.coefficients();
        assert!(
            (g[0] - 2.0).abs() < 1e-12 && (g[1] - 3.0).abs() < 1e-12 && (g[2] - 1.0).abs() < 1e-12
        );
        assert!(overlap_residual(&es1, &[1.0; 3], &es2, &[1.0; 3]).unwrap() < 1e-15);
    }

    #[test]
    fn hatano_nelson_chains_cannot_match_norms() {
        // E and −E eigenvectors share |⟨L_n|e_k⟩|², so only about N/2 columns are independent.
        let es1 = hn(4, 0.3).eigensystem().unwrap();
        let es2 = hn(4, 0.6).eigensystem().unwrap();
        let g1 = canonical_coefficients(&es1);
        assert!(matches!(
            solve_norm_matching(&es1, &g1, &es2),
            Err(Error::SingularSystem)
        ));
    }

    #[test]
    fn singular_norm_matching_system() {
        // Both eigenvectors of [[0,1],[1,0]] have equal weight on both sites.
        let flip = real(2, &[0.0, 1.0, 1.0, 0.0]);
        let es = flip.eigensystem().unwrap();
        let diag = real(2, &[-1.0, 0.0, 0.0, 1.0]).eigensystem().unwrap();
        assert!(matches!(
            solve_norm_matching(&diag, &[1.0, 1.0], &es),
            Err(Error::SingularSystem)
        ));
    }
}
