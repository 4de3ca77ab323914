//! Gauged biorthonormal bases and the biorthogonal inner product built from them.
//!
//! A [`BiorthogonalBasis`] fixes the residual freedom `R_n → c_n R_n`, `L_n → (c_n*)⁻¹ L_n`
//! left by the condition `⟨L_m|R_n⟩ = δ_mn`. Every quantity computed here for superpositions
//! of eigenvectors depends on that choice; quantities evaluated on single eigenvectors do not.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    check_dim, dominant_index, CMatrix, CVector, ComplexMatrix, EigenSystem, ONE, ZERO,
};

/// How the eigenvector scales of a biorthonormal basis are chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GaugeChoice {
    /// `⟨R_n|R_n⟩ = 1`.
    RightUnit,
    /// `⟨L_n|L_n⟩ = 1`.
    LeftUnit,
    /// `⟨R_n|R_n⟩` drawn uniformly from `(0, 1]`, reproducibly from the seed.
    RandomScale { seed: u64 },
    /// `R_n` is `c_n` times its right-unit form.
    ExplicitScale(Vec<Complex64>),
}

impl GaugeChoice {
    /// Short label without commas, used in tables and plots.
    pub fn label(&self) -> String {
        match self {
            GaugeChoice::RightUnit => "right_unit".into(),
            GaugeChoice::LeftUnit => "left_unit".into(),
            GaugeChoice::RandomScale { seed } => format!("random_scale:{seed}"),
            GaugeChoice::ExplicitScale(scales) => {
                let parts: Vec<String> = scales
                    .iter()
                    .map(|c| format!("{}{:+}i", c.re, c.im))
                    .collect();
                format!("explicit_scale:{}", parts.join(";"))
            }
        }
    }
}

/// Nonzero vector in the computational basis `{|e_k⟩}`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector(CVector);

impl StateVector {
    pub fn new(components: CVector) -> Result<Self> {
        if components
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite);
        }
        if components.iter().all(|z| *z == ZERO) {
            return Err(Error::ZeroVector);
        }
        Ok(Self(components))
    }

    pub fn from_slice(components: &[Complex64]) -> Result<Self> {
        Self::new(CVector::from_column_slice(components))
    }

    /// `|e_k⟩`.
    pub fn site(dim: usize, k: usize) -> Result<Self> {
        Self::site_sum(dim, &[k])
    }

    /// `Σ_k |e_k⟩` over the given sites (0-based).
    pub fn site_sum(dim: usize, sites: &[usize]) -> Result<Self> {
        let mut v = CVector::zeros(dim);
        for &k in sites {
            if k >= dim {
                return Err(Error::IndexOutOfRange { index: k, dim });
            }
            v[k] += ONE;
        }
        Self::new(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_vector(&self) -> &CVector {
        &self.0
    }

    pub fn into_vector(self) -> CVector {
        self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }
}

impl AsRef<CVector> for StateVector {
    fn as_ref(&self) -> &CVector {
        &self.0
    }
}

/// An eigensystem rescaled so that `⟨L_m|R_n⟩ = δ_mn` under a specific gauge.
#[derive(Debug, Clone, PartialEq)]
pub struct BiorthogonalBasis {
    system: EigenSystem,
    gauge: GaugeChoice,
}

/// Phase that makes the dominant component of `v` real and positive.
fn phase_fix(v: &CVector) -> Complex64 {
    let p = v[dominant_index(v.iter())];
    p.conj() / p.norm()
}

pub fn apply_gauge(es: &EigenSystem, gauge: &GaugeChoice) -> Result<BiorthogonalBasis> {
    let n = es.dim();
    let extra: Vec<Complex64> = match gauge {
        GaugeChoice::RightUnit | GaugeChoice::LeftUnit => vec![ONE; n],
        GaugeChoice::RandomScale { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            // 1 − U[0, 1) lies in (0, 1]; the scale is its square root so that ⟨R|R⟩ = u.
            (0..n)
                .map(|_| Complex64::new((1.0 - rng.random::<f64>()).sqrt(), 0.0))
                .collect()
        }
        GaugeChoice::ExplicitScale(scales) => {
            check_dim(n, scales.len())?;
            if let Some(index) = scales.iter().position(|c| *c == ZERO) {
                return Err(Error::ZeroScale { index });
            }
            scales.clone()
        }
    };

    let mut right_scales = Vec::with_capacity(n);
    let mut left_scales = Vec::with_capacity(n);
    for (k, scale) in extra.iter().enumerate() {
        let r = es.right(k);
        let overlap = es.overlap(k);
        let base = match gauge {
            GaugeChoice::LeftUnit => {
                let l = es.left(k) / overlap.conj();
                let p = l[dominant_index(l.iter())];
                (p.conj() / p.norm()) * l.norm()
            }
            _ => phase_fix(&r) / r.norm(),
        };
        let c = base * scale;
        right_scales.push(c);
        left_scales.push(ONE / (overlap.conj() * c.conj()));
    }
    Ok(BiorthogonalBasis {
        system: es.rescale(&right_scales, &left_scales)?,
        gauge: gauge.clone(),
    })
}

impl BiorthogonalBasis {
    pub fn new(es: &EigenSystem, gauge: &GaugeChoice) -> Result<Self> {
        apply_gauge(es, gauge)
    }

    pub fn eigensystem(&self) -> &EigenSystem {
        &self.system
    }

    pub fn gauge(&self) -> &GaugeChoice {
        &self.gauge
    }

    pub fn dim(&self) -> usize {
        self.system.dim()
    }

    /// Coefficients `a_n = ⟨L_n|v⟩` of `v = Σ a_n |R_n⟩`.
    pub fn expand(&self, v: &StateVector) -> Result<CVector> {
        check_dim(self.dim(), v.dim())?;
        Ok(self.system.left_vectors().adjoint() * v.as_vector())
    }

    /// `(u, v)_B = Σ a_n* b_n`.
    pub fn inner(&self, u: &StateVector, v: &StateVector) -> Result<Complex64> {
        let a = self.expand(u)?;
        let b = self.expand(v)?;
        Ok(a.dotc(&b))
    }

    /// `|ṽ⟩ = Σ a_n |L_n⟩`.
    pub fn associated_vector(&self, v: &StateVector) -> Result<StateVector> {
        let a = self.expand(v)?;
        StateVector::new(self.system.left_vectors() * a)
    }

    pub fn transition_probability(&self, u: &StateVector, v: &StateVector) -> Result<f64> {
        let a = self.expand(u)?;
        let b = self.expand(v)?;
        let p = a.dotc(&b).norm_sqr() / (a.norm_squared() * b.norm_squared());
        Ok(p.min(1.0))
    }

    /// `p_n = |a_n|² / Σ_m |a_m|²`.
    pub fn energy_probabilities(&self, v: &StateVector) -> Result<Vec<f64>> {
        let a = self.expand(v)?;
        let total = a.norm_squared();
        Ok(a.iter().map(|z| z.norm_sqr() / total).collect())
    }

    /// `⟨ṽ|Q|v⟩ / ⟨ṽ|v⟩`, returned as computed (complex for non-observables).
    pub fn expectation(&self, q: &ComplexMatrix, v: &StateVector) -> Result<Complex64> {
        check_dim(self.dim(), q.dim())?;
        let associated = self.associated_vector(v)?;
        let tilde = associated.as_vector();
        let x = v.as_vector();
        Ok(tilde.dotc(&(q.as_matrix() * x)) / tilde.dotc(x))
    }

    /// Matrix `q_mn = ⟨L_m|Q|R_n⟩`, so that `Q = Σ q_mn |R_m⟩⟨L_n|`.
    pub fn decompose_operator(&self, q: &ComplexMatrix) -> Result<CMatrix> {
        check_dim(self.dim(), q.dim())?;
        Ok(self.system.left_vectors().adjoint() * q.as_matrix() * self.system.right_vectors())
    }

    /// `Σ q_mn |R_m⟩⟨L_n|`.
    pub fn compose_operator(&self, q: &CMatrix) -> Result<CMatrix> {
        check_dim(self.dim(), q.nrows())?;
        check_dim(self.dim(), q.ncols())?;
        Ok(self.system.right_vectors() * q * self.system.left_vectors().adjoint())
    }

    pub fn is_biorthogonally_hermitian(&self, q: &ComplexMatrix, tol: f64) -> Result<bool> {
        let m = self.decompose_operator(q)?;
        Ok((&m - m.adjoint()).norm() <= tol * m.norm())
    }

    /// `⟨L_n|e_k⟩⟨e_k|R_n⟩ / ⟨L_n|R_n⟩`, the site-`k` projector in eigenstate `n`.
    pub fn projector_expectation(&self, site: usize, n: usize) -> Result<Complex64> {
        let dim = self.dim();
        for index in [site, n] {
            if index >= dim {
                return Err(Error::IndexOutOfRange { index, dim });
            }
        }
        let l = self.system.left_vectors()[(site, n)];
        let r = self.system.right_vectors()[(site, n)];
        Ok(l.conj() * r / self.system.overlap(n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{hatano_nelson, HatanoNelsonSpec};
    use approx::assert_abs_diff_eq;

    fn hn2() -> (ComplexMatrix, EigenSystem) {
        let h = hatano_nelson(&HatanoNelsonSpec::new(2, 0.5).unwrap()).unwrap();
        let es = h.eigensystem().unwrap();
        (h, es)
    }

    fn ones() -> StateVector {
        StateVector::site_sum(2, &[0, 1]).unwrap()
    }

    #[test]
    fn right_unit_expansion_of_uniform_state() {
        let (_, es) = hn2();
        let basis = apply_gauge(&es, &GaugeChoice::RightUnit).unwrap();
        let a = basis.expand(&ones()).unwrap();
        let s = 1.0 / 3f64.sqrt();
        assert_abs_diff_eq!(a[0].re, s - 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(a[1].re, s + 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(a[0].im, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn gauges_produce_biorthonormal_pairs() {
        let (_, es) = hn2();
        for gauge in [
            GaugeChoice::RightUnit,
            GaugeChoice::LeftUnit,
            GaugeChoice::RandomScale { seed: 3 },
            GaugeChoice::ExplicitScale(vec![Complex64::new(0.0, 2.0), Complex64::new(-0.5, 0.1)]),
        ] {
            let b = apply_gauge(&es, &gauge).unwrap();
            let m = b.eigensystem().left_vectors().adjoint() * b.eigensystem().right_vectors();
            assert!((m - CMatrix::identity(2, 2)).norm() < 1e-12, "{gauge:?}");
        }
        let right = apply_gauge(&es, &GaugeChoice::RightUnit).unwrap();
        let left = apply_gauge(&es, &GaugeChoice::LeftUnit).unwrap();
        for n in 0..2 {
            assert_abs_diff_eq!(right.eigensystem().right(n).norm(), 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(left.eigensystem().left(n).norm(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn random_scale_is_reproducible_and_bounded() {
        let (_, es) = hn2();
        let a = apply_gauge(&es, &GaugeChoice::RandomScale { seed: 11 }).unwrap();
        let b = apply_gauge(&es, &GaugeChoice::RandomScale { seed: 11 }).unwrap();
        let c = apply_gauge(&es, &GaugeChoice::RandomScale { seed: 12 }).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        for n in 0..2 {
            let r = a.eigensystem().right(n).norm_squared();
            assert!(r > 0.0 && r <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn explicit_scale_errors() {
        let (_, es) = hn2();
        let zero = GaugeChoice::ExplicitScale(vec![ONE, ZERO]);
        assert!(matches!(
            apply_gauge(&es, &zero),
            Err(Error::ZeroScale { index: 1 })
        ));
        let short = GaugeChoice::ExplicitScale(vec![ONE]);
        assert!(matches!(
            apply_gauge(&es, &short),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn expectation_depends_on_gauge() {
        let (h, es) = hn2();
        let right = apply_gauge(&es, &GaugeChoice::RightUnit).unwrap();
        let e = right.expectation(&h, &ones()).unwrap();
        assert_abs_diff_eq!(e.re, 0.75, epsilon = 1e-12);
        assert_abs_diff_eq!(e.im, 0.0, epsilon = 1e-12);

        // Doubling the positive-energy right vector halves its coefficient.
        let doubled = GaugeChoice::ExplicitScale(vec![ONE, Complex64::new(2.0, 0.0)]);
        let b = apply_gauge(&es, &doubled).unwrap();
        let e = b.expectation(&h, &ones()).unwrap();
        let s = 1.0 / 3f64.sqrt();
        let (minus, plus) = ((s - 1.0).powi(2), ((s + 1.0) / 2.0).powi(2));
        let exact = 0.75f64.sqrt() * (plus - minus) / (plus + minus);
        assert_abs_diff_eq!(e.re, exact, epsilon = 1e-12);
        assert_abs_diff_eq!(e.re, 0.4796, epsilon = 1e-3);
    }

    #[test]
    fn energy_probabilities_of_uniform_state() {
        let (_, es) = hn2();
        let right = apply_gauge(&es, &GaugeChoice::RightUnit).unwrap();
        let p = right.energy_probabilities(&ones()).unwrap();
        assert_abs_diff_eq!(p[0], 0.066987, epsilon = 1e-5);
        assert_abs_diff_eq!(p[1], 0.933013, epsilon = 1e-5);
        assert_abs_diff_eq!(p.iter().sum::<f64>(), 1.0, epsilon = 1e-12);

        let doubled = GaugeChoice::ExplicitScale(vec![ONE, Complex64::new(2.0, 0.0)]);
        let p = apply_gauge(&es, &doubled)
            .unwrap()
            .energy_probabilities(&ones())
            .unwrap();
        assert_abs_diff_eq!(p[0], 0.22311, epsilon = 1e-4);
        assert_abs_diff_eq!(p[1], 0.77689, epsilon = 1e-4);
    }

    #[test]
    fn eigenstates_are_gauge_independent() {
        let (h, es) = hn2();
        let b = apply_gauge(&es, &GaugeChoice::RandomScale { seed: 5 }).unwrap();
        for n in 0..2 {
            let r = StateVector::new(b.eigensystem().right(n)).unwrap();
            let e = b.expectation(&h, &r).unwrap();
            assert_abs_diff_eq!(e.re, es.eigenvalue(n).re, epsilon = 1e-12);
        }
        let r0 = StateVector::new(b.eigensystem().right(0)).unwrap();
        let r1 = StateVector::new(b.eigensystem().right(1)).unwrap();
        assert_abs_diff_eq!(
            b.transition_probability(&r0, &r1).unwrap(),
            0.0,
            epsilon = 1e-24
        );
        assert_abs_diff_eq!(
            b.transition_probability(&r0, &r0).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(b.inner(&r1, &r1).unwrap().re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn hamiltonian_decomposes_to_its_spectrum() {
        let (h, es) = hn2();
        let b = apply_gauge(&es, &GaugeChoice::LeftUnit).unwrap();
        let q = b.decompose_operator(&h).unwrap();
        let diag = CMatrix::from_diagonal(&CVector::from_column_slice(es.eigenvalues()));
        assert!((&q - diag).norm() < 1e-12);
        assert!((b.compose_operator(&q).unwrap() - h.as_matrix()).norm() < 1e-12);
        assert!(b.is_biorthogonally_hermitian(&h, 1e-10).unwrap());
        let ih = ComplexMatrix::new(h.as_matrix() * Complex64::i()).unwrap();
        assert!(!b.is_biorthogonally_hermitian(&ih, 1e-10).unwrap());
    }

    #[test]
    fn associated_vector_is_left_combination() {
        let (_, es) = hn2();
        let b = apply_gauge(&es, &GaugeChoice::RightUnit).unwrap();
        let v = ones();
        let tilde = b.associated_vector(&v).unwrap();
        let a = b.expand(&v).unwrap();
        assert_abs_diff_eq!(
            tilde.as_vector().dotc(v.as_vector()).re,
            a.norm_squared(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn site_projectors_sum_to_one() {
        let (_, es) = hn2();
        let b = apply_gauge(&es, &GaugeChoice::RightUnit).unwrap();
        for n in 0..2 {
            let total: Complex64 = (0..2).map(|k| b.projector_expectation(k, n).unwrap()).sum();
            assert_abs_diff_eq!(total.re, 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(total.im, 0.0, epsilon = 1e-12);
        }
        // ⟨L₊|e₀⟩⟨e₀|R₊⟩ = (1/√3)(√3/2).
        assert_abs_diff_eq!(
            b.projector_expectation(0, 1).unwrap().re,
            0.5,
            epsilon = 1e-12
        );
        assert!(matches!(
            b.projector_expectation(2, 0),
            Err(Error::IndexOutOfRange { index: 2, dim: 2 })
        ));
    }

    #[test]
    fn hermitian_projectors_are_probabilities() {
        let h = hatano_nelson(&HatanoNelsonSpec::new(4, 0.0).unwrap()).unwrap();
        let b = apply_gauge(&h.eigensystem().unwrap(), &GaugeChoice::RightUnit).unwrap();
        for n in 0..4 {
            for k in 0..4 {
                let p = b.projector_expectation(k, n).unwrap();
                assert_abs_diff_eq!(
                    p.re,
                    b.eigensystem().right(n)[k].norm_sqr(),
                    epsilon = 1e-12
                );
                assert_abs_diff_eq!(p.im, 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn state_vector_validation() {
        assert!(matches!(
            StateVector::new(CVector::zeros(3)),
            Err(Error::ZeroVector)
        ));
        assert!(matches!(
            StateVector::from_slice(&[Complex64::new(f64::NAN, 0.0)]),
            Err(Error::NonFinite)
        ));
        assert!(matches!(
            StateVector::site(2, 2),
            Err(Error::IndexOutOfRange { .. })
        ));
        let (_, es) = hn2();
        let b = apply_gauge(&es, &GaugeChoice::RightUnit).unwrap();
        let v = StateVector::site(3, 0).unwrap();
        assert!(matches!(b.expand(&v), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn gauge_labels_are_comma_free() {
        let g = GaugeChoice::ExplicitScale(vec![Complex64::new(1.0, -2.0), ONE]);
        assert!(!g.label().contains(','));
        assert_eq!(
            GaugeChoice::RandomScale { seed: 4 }.label(),
            "random_scale:4"
        );
    }
}
