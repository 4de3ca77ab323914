use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::biortho::{GaugeChoice, StateVector};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, ComplexMatrix, EigenSystem};
use crate::metric::represent_state;
use crate::models::{hatano_nelson, load_matrix, HatanoNelsonSpec};

pub const DEFAULT_SITES: usize = 20;

/// Which Hamiltonian a sweep evaluates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    /// Hatano-Nelson chain, optionally conjugated as `S H S⁻¹` with `S = diag(similarity_diagonal)`.
    HatanoNelson {
        #[serde(default = "default_sites")]
        sites: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        similarity_diagonal: Option<Vec<f64>>,
    },
    /// A fixed matrix in the JSON matrix format; the γ grid only labels rows.
    MatrixFile(PathBuf),
}

fn default_sites() -> usize {
    DEFAULT_SITES
}

/// γ values, either listed or as an inclusive `start..=stop` range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GammaGrid {
    List(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

impl Default for GammaGrid {
    fn default() -> Self {
        GammaGrid::Range {
            start: 0.0,
            stop: 0.99,
            step: 0.01,
        }
    }
}

impl GammaGrid {
    pub fn values(&self) -> Result<Vec<f64>> {
        let values = match self {
            GammaGrid::List(values) => values.clone(),
            GammaGrid::Range { start, stop, step } => {
                if !step.is_finite()
                    || *step <= 0.0
                    || !start.is_finite()
                    || !stop.is_finite()
                    || stop < start
                {
                    return Err(Error::InvalidConfig(format!(
                        "gamma range needs start <= stop and step > 0, got {start}..{stop} step {step}"
                    )));
                }
                let count = ((stop - start) / step + 1e-9).floor() as usize;
                // Rounded so that e.g. 0.1 + 2·0.05 prints as 0.2.
                (0..=count)
                    .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
                    .collect()
            }
        };
        if values.is_empty() {
            return Err(Error::InvalidConfig("gamma grid is empty".into()));
        }
        if values.iter().any(|g| !g.is_finite()) {
            return Err(Error::InvalidConfig(
                "gamma grid contains non-finite values".into(),
            ));
        }
        Ok(values)
    }
}

/// The state whose expectation value is swept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    /// `Σ |e_k⟩` over 0-based site indices.
    Sites(Vec<usize>),
    /// Normalized amplitudes over the eigenvectors at each γ.
    Amplitudes(Vec<Complex64>),
    /// Explicit components in the computational basis.
    Components(Vec<Complex64>),
}

impl Default for StateSpec {
    fn default() -> Self {
        StateSpec::Sites(vec![0, 1])
    }
}

impl StateSpec {
    pub fn label(&self) -> String {
        let complex = |zs: &[Complex64]| {
            zs.iter()
                .map(|z| format!("{}{:+}i", z.re, z.im))
                .collect::<Vec<_>>()
                .join(" ")
        };
        match self {
            StateSpec::Sites(sites) => {
                let parts: Vec<String> = sites.iter().map(|k| format!("e{k}")).collect();
                parts.join("+")
            }
            StateSpec::Amplitudes(c) => format!("amplitudes {}", complex(c)),
            StateSpec::Components(v) => format!("components {}", complex(v)),
        }
    }

    pub fn build(&self, es: &EigenSystem) -> Result<StateVector> {
        let dim = es.dim();
        match self {
            StateSpec::Sites(sites) => StateVector::site_sum(dim, sites),
            StateSpec::Amplitudes(c) => represent_state(es, c),
            StateSpec::Components(v) => {
                crate::linalg::check_dim(dim, v.len())?;
                StateVector::from_slice(v)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnerProductKind {
    Biorthogonal,
    CanonicalMetric,
}

impl InnerProductKind {
    pub fn label(self) -> &'static str {
        match self {
            InnerProductKind::Biorthogonal => "biorthogonal",
            InnerProductKind::CanonicalMetric => "canonical_metric",
        }
    }
}

fn default_gauges() -> Vec<GaugeChoice> {
    vec![
        GaugeChoice::RightUnit,
        GaugeChoice::LeftUnit,
        GaugeChoice::RandomScale { seed: 1 },
    ]
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

/// One experiment, read from a single JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    #[serde(default)]
    pub gamma_grid: GammaGrid,
    #[serde(default = "default_gauges")]
    pub gauges: Vec<GaugeChoice>,
    #[serde(default)]
    pub state: StateSpec,
    pub inner_product: InnerProductKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn from_json(json: &str) -> Result<Self> {
        serde_json::from_str(json).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    /// Reads a config file; relative paths inside it are taken relative to the file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_json(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        if let ModelSpec::MatrixFile(file) = &mut cfg.model {
            if file.is_relative() {
                *file = base.join(&*file);
            }
        }
        if cfg.output_dir.is_relative() {
            cfg.output_dir = base.join(&cfg.output_dir);
        }
        Ok(cfg)
    }

    /// Checks everything that can be checked without an eigendecomposition.
    pub fn validate(&self) -> Result<()> {
        self.gamma_grid.values()?;
        if self.gauges.is_empty() {
            return Err(Error::InvalidConfig("no gauges given".into()));
        }
        let dim = self.dimension()?;
        if let ModelSpec::HatanoNelson {
            similarity_diagonal: Some(s),
            ..
        } = &self.model
        {
            crate::linalg::check_dim(dim, s.len())?;
            if s.iter().any(|x| !(x.is_finite() && *x != 0.0)) {
                return Err(Error::InvalidConfig(
                    "similarity diagonal must be finite and nonzero".into(),
                ));
            }
        }
        for gauge in &self.gauges {
            if let GaugeChoice::ExplicitScale(scales) = gauge {
                crate::linalg::check_dim(dim, scales.len())?;
            }
        }
        match &self.state {
            StateSpec::Sites(sites) => {
                StateVector::site_sum(dim, sites)?;
            }
            StateSpec::Components(v) => {
                crate::linalg::check_dim(dim, v.len())?;
                StateVector::from_slice(v)?;
            }
            StateSpec::Amplitudes(c) => {
                crate::linalg::check_dim(dim, c.len())?;
                let norm_sq: f64 = c.iter().map(|z| z.norm_sqr()).sum();
                if (norm_sq - 1.0).abs() > 1e-10 {
                    return Err(Error::NotNormalized { norm_sq });
                }
            }
        }
        Ok(())
    }

    /// Hilbert-space dimension of the model.
    pub fn dimension(&self) -> Result<usize> {
        match &self.model {
            ModelSpec::HatanoNelson { sites, .. } => {
                HatanoNelsonSpec::new(*sites, 0.0)?;
                Ok(*sites)
            }
            ModelSpec::MatrixFile(path) => Ok(load_matrix(path)?.dim()),
        }
    }

    /// Hamiltonian builder for this config; matrix files are read once.
    pub fn hamiltonian_source(&self) -> Result<HamiltonianSource> {
        Ok(match &self.model {
            ModelSpec::HatanoNelson {
                sites,
                similarity_diagonal,
            } => HamiltonianSource::HatanoNelson {
                sites: *sites,
                similarity: similarity_diagonal.clone(),
            },
            ModelSpec::MatrixFile(path) => HamiltonianSource::Fixed(load_matrix(path)?),
        })
    }

    /// Seed actually used for a `RandomScale` gauge: mixes the config seed with the gauge's own.
    pub fn effective_gauge(&self, gauge: &GaugeChoice) -> GaugeChoice {
        match gauge {
            GaugeChoice::RandomScale { seed } => GaugeChoice::RandomScale {
                seed: splitmix64(self.seed ^ splitmix64(*seed)),
            },
            other => other.clone(),
        }
    }
}

pub enum HamiltonianSource {
    HatanoNelson {
        sites: usize,
        similarity: Option<Vec<f64>>,
    },
    Fixed(ComplexMatrix),
}

impl HamiltonianSource {
    pub fn at(&self, gamma: f64) -> Result<ComplexMatrix> {
        match self {
            HamiltonianSource::Fixed(h) => Ok(h.clone()),
            HamiltonianSource::HatanoNelson { sites, similarity } => {
                let h = hatano_nelson(&HatanoNelsonSpec::new(*sites, gamma)?)?;
                match similarity {
                    None => Ok(h),
                    Some(s) => {
                        let m = h.as_matrix();
                        ComplexMatrix::new(CMatrix::from_fn(*sites, *sites, |r, c| {
                            m[(r, c)] * (s[r] / s[c])
                        }))
                    }
                }
            }
        }
    }
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
