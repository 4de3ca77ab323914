use std::fs;
use std::path::Path;

use serde::Serialize;

use super::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::linalg::{eigendecompose, EigenSystem, ToleranceSet};
use crate::metric::{canonical_coefficients, GramMetric};
use crate::transport::{
    build_map, overlap_residual, pair_eigenvalues, position_norms, solve_norm_matching,
    spectrum_threshold, NormMatching,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumSection {
    pub matched: bool,
    pub max_pair_distance: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MapSection {
    /// `‖G₁ − T†G₂T‖ / ‖G₁‖`.
    pub metric_residual: f64,
    pub inverse_residual: f64,
    pub eigenvector_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormMatchingSection {
    /// `feasible`, `infeasible` or `failed`.
    pub status: String,
    pub coefficients: Option<Vec<f64>>,
    pub non_positive: Vec<usize>,
    /// Largest relative mismatch of `⟨e_k|G|e_k⟩` after matching.
    pub norm_residual: Option<f64>,
    /// `max_{k≠l} |⟨e_k|G₁|e_l⟩ − ⟨e_k|G₂|e_l⟩|` with the matched coefficients.
    pub overlap_residual: Option<f64>,
    pub error: Option<String>,
}

/// Everything `run transport` writes for one pair of configs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransportReport {
    pub dimension: usize,
    pub gamma_a: f64,
    pub gamma_b: f64,
    pub spectrum: SpectrumSection,
    pub map: Option<MapSection>,
    pub map_error: Option<String>,
    pub norm_matching: NormMatchingSection,
}

impl TransportReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization is infallible")
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json() + "\n").map_err(|e| Error::io(path, e))
    }
}

fn eigensystem(cfg: &ExperimentConfig) -> Result<(f64, EigenSystem)> {
    let gamma = cfg.gamma_grid.values()?[0];
    let h = cfg.hamiltonian_source()?.at(gamma)?;
    Ok((gamma, eigendecompose(&h, &ToleranceSet::for_matrix(&h))?))
}

fn norm_matching_section(src: &EigenSystem, dst: &EigenSystem) -> NormMatchingSection {
    let g1 = canonical_coefficients(src);
    let matched = match solve_norm_matching(src, &g1, dst) {
        Ok(m) => m,
        Err(e) => {
            return NormMatchingSection {
                status: "failed".into(),
                coefficients: None,
                non_positive: Vec::new(),
                norm_residual: None,
                overlap_residual: None,
                error: Some(e.to_string()),
            }
        }
    };
    let g2 = matched.coefficients().to_vec();
    let norm_residual = position_norms(src, &g1)
        .and_then(|before| Ok((before, position_norms(dst, &g2)?)))
        .map(|(before, after)| {
            before
                .iter()
                .zip(&after)
                .map(|(a, b)| (a - b).abs() / a.abs())
                .fold(0.0, f64::max)
        })
        .ok();
    let (status, non_positive) = match &matched {
        NormMatching::Feasible(_) => ("feasible", Vec::new()),
        NormMatching::Infeasible { non_positive, .. } => ("infeasible", non_positive.clone()),
    };
    NormMatchingSection {
        status: status.into(),
        overlap_residual: overlap_residual(src, &g1, dst, &g2).ok(),
        coefficients: Some(g2),
        non_positive,
        norm_residual,
        error: None,
    }
}

/// Compares the canonical-metric representations of two models at the first γ of each grid.
///
/// Dimension mismatches are errors; mismatched spectra are recorded in the report.
pub fn run_transport_report(a: &ExperimentConfig, b: &ExperimentConfig) -> Result<TransportReport> {
    let (dim_a, dim_b) = (a.dimension()?, b.dimension()?);
    if dim_a != dim_b {
        return Err(Error::DimensionMismatch {
            expected: dim_a,
            actual: dim_b,
        });
    }
    let (gamma_a, src) = eigensystem(a)?;
    let (gamma_b, dst) = eigensystem(b)?;

    let threshold = spectrum_threshold(&src, &dst);
    let max_pair_distance = pair_eigenvalues(&src, &dst)?
        .iter()
        .map(|p| p.1)
        .fold(0.0, f64::max);
    let spectrum = SpectrumSection {
        matched: max_pair_distance <= threshold,
        max_pair_distance,
        threshold,
    };

    let built = GramMetric::canonical(&src)
        .and_then(|g1| Ok((g1, GramMetric::canonical(&dst)?)))
        .and_then(|(g1, g2)| build_map(&g1, &g2));
    let (map, map_error) = match built {
        Ok(map) => {
            let r = map.residuals();
            let section = MapSection {
                metric_residual: r.metric,
                inverse_residual: r.inverse,
                eigenvector_residual: r.eigenvectors,
            };
            (Some(section), None)
        }
        Err(e) => (None, Some(e.to_string())),
    };

    Ok(TransportReport {
        dimension: dim_a,
        gamma_a,
        gamma_b,
        spectrum,
        map,
        map_error,
        norm_matching: norm_matching_section(&src, &dst),
    })
}
