#![allow(dead_code)]

use nalgebra::DMatrix;
use nhqm::linalg::CVector;
use nhqm::models::{hatano_nelson, HatanoNelsonSpec};
use nhqm::{ComplexMatrix, StateVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn complex(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

/// Entries uniform in the unit square; non-defective with probability one.
pub fn random_operator(rng: &mut ChaCha8Rng, dim: usize) -> ComplexMatrix {
    ComplexMatrix::new(DMatrix::from_fn(dim, dim, |_, _| complex(rng))).unwrap()
}

pub fn random_state(rng: &mut ChaCha8Rng, dim: usize) -> StateVector {
    StateVector::new(CVector::from_fn(dim, |_, _| complex(rng))).unwrap()
}

/// Nonzero scale with magnitude in `[0.1, 10]` and arbitrary phase.
pub fn random_scale(rng: &mut ChaCha8Rng) -> Complex64 {
    let magnitude = 10f64.powf(rng.random_range(-1.0..1.0));
    Complex64::from_polar(magnitude, rng.random_range(0.0..std::f64::consts::TAU))
}

/// `S H S⁻¹` with a random well-conditioned `S` (identity plus a bounded perturbation).
pub fn similarity_pair(rng: &mut ChaCha8Rng, dim: usize) -> (ComplexMatrix, ComplexMatrix) {
    let h = random_operator(rng, dim);
    let s = DMatrix::from_fn(dim, dim, |r, c| {
        let base = if r == c {
            Complex64::from(2.0)
        } else {
            Complex64::from(0.0)
        };
        base + complex(rng) * 0.5
    });
    let s_inv = s.clone().try_inverse().unwrap();
    let h2 = ComplexMatrix::new(&s * h.as_matrix() * s_inv).unwrap();
    (h, h2)
}

pub fn hn(sites: usize, gamma: f64) -> ComplexMatrix {
    hatano_nelson(&HatanoNelsonSpec::new(sites, gamma).unwrap()).unwrap()
}

/// `2√(1−γ²) cos(nπ/(N+1))`, n = 1..N, ascending.
pub fn hn_spectrum(sites: usize, gamma: f64) -> Vec<f64> {
    let scale = 2.0 * (1.0 - gamma * gamma).sqrt();
    let mut values: Vec<f64> = (1..=sites)
        .map(|n| scale * (n as f64 * std::f64::consts::PI / (sites as f64 + 1.0)).cos())
        .collect();
    values.sort_by(f64::total_cmp);
    values
}

pub fn rel_err(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1e-300)
}
