use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;

use super::config::{ExperimentConfig, InnerProductKind};
use crate::biortho::apply_gauge;
use crate::error::{Error, Result};
use crate::linalg::{eigendecompose, ToleranceSet};
use crate::metric::GramMetric;

pub const SWEEP_HEADER: [&str; 6] = ["gamma", "gauge", "re_exp", "im_exp", "abs_exp", "status"];

/// One `(γ, gauge)` evaluation; `value` is `None` when the row failed.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub gamma: f64,
    pub gauge: String,
    pub value: Option<Complex64>,
    pub status: String,
}

/// Expectation-value table plus `key=value` metadata written as `#` comment lines.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepTable {
    pub metadata: Vec<(String, String)>,
    pub rows: Vec<SweepRow>,
}

fn format_number(x: Option<f64>) -> String {
    x.map(|x| x.to_string()).unwrap_or_default()
}

fn parse_number(field: &str, line: usize) -> Result<Option<f64>> {
    if field.is_empty() {
        return Ok(None);
    }
    field
        .parse()
        .map(Some)
        .map_err(|_| Error::SchemaMismatch(format!("row {line}: '{field}' is not a number")))
}

impl SweepTable {
    pub fn metadata_value(&self, key: &str) -> Option<&str> {
        self.metadata
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    /// Gauge labels in order of first appearance.
    pub fn gauges(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for row in &self.rows {
            if !out.contains(&row.gauge) {
                out.push(row.gauge.clone());
            }
        }
        out
    }

    /// Largest spread of `|⟨H⟩|` across gauges at a single γ; failed rows are ignored.
    pub fn max_abs_spread(&self) -> f64 {
        let mut worst: f64 = 0.0;
        let mut i = 0;
        while i < self.rows.len() {
            let gamma = self.rows[i].gamma;
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            while i < self.rows.len() && self.rows[i].gamma == gamma {
                if let Some(v) = self.rows[i].value {
                    lo = lo.min(v.norm());
                    hi = hi.max(v.norm());
                }
                i += 1;
            }
            if hi >= lo {
                worst = worst.max(hi - lo);
            }
        }
        worst
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            writeln!(out, "# {k}={v}").expect("writing to a String cannot fail");
        }
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(SWEEP_HEADER).expect("in-memory csv");
        for row in &self.rows {
            writer
                .write_record([
                    row.gamma.to_string(),
                    row.gauge.clone(),
                    format_number(row.value.map(|v| v.re)),
                    format_number(row.value.map(|v| v.im)),
                    format_number(row.value.map(|v| v.norm())),
                    row.status.clone(),
                ])
                .expect("in-memory csv");
        }
        let body = writer.into_inner().expect("in-memory csv");
        out.push_str(std::str::from_utf8(&body).expect("csv of utf-8 fields is utf-8"));
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_csv_string()).map_err(|e| Error::io(path, e))
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut metadata = Vec::new();
        for line in text.lines().take_while(|l| l.starts_with('#')) {
            if let Some((k, v)) = line.trim_start_matches('#').trim().split_once('=') {
                metadata.push((k.to_string(), v.to_string()));
            }
        }
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let header = reader
            .headers()
            .map_err(|e| Error::SchemaMismatch(e.to_string()))?
            .clone();
        if header.iter().ne(SWEEP_HEADER) {
            return Err(Error::SchemaMismatch(format!(
                "expected header {}, found {}",
                SWEEP_HEADER.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut rows = Vec::new();
        for (line, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::SchemaMismatch(e.to_string()))?;
            let gamma = parse_number(&record[0], line)?
                .ok_or_else(|| Error::SchemaMismatch(format!("row {line}: missing gamma")))?;
            let re = parse_number(&record[2], line)?;
            let im = parse_number(&record[3], line)?;
            let value = match (re, im) {
                (Some(re), Some(im)) => Some(Complex64::new(re, im)),
                _ => None,
            };
            rows.push(SweepRow {
                gamma,
                gauge: record[1].to_string(),
                value,
                status: record[5].to_string(),
            });
        }
        Ok(Self { metadata, rows })
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv_str(&text)
    }
}

/// Expectation of the Hamiltonian in the configured state, one row per `(γ, gauge)`.
///
/// Eigensolver and gauge failures mark the affected rows as failed instead of aborting.
pub fn run_expectation_sweep(cfg: &ExperimentConfig) -> Result<SweepTable> {
    cfg.validate()?;
    let grid = cfg.gamma_grid.values()?;
    let source = cfg.hamiltonian_source()?;

    let blocks: Vec<Vec<SweepRow>> = grid
        .par_iter()
        .map(|&gamma| {
            let labels = cfg.gauges.iter().map(|g| g.label());
            let failed = |reason: String| {
                labels
                    .clone()
                    .map(|gauge| SweepRow {
                        gamma,
                        gauge,
                        value: None,
                        status: format!("failed: {reason}"),
                    })
                    .collect::<Vec<_>>()
            };
            let h = match source.at(gamma) {
                Ok(h) => h,
                Err(e) => return failed(e.to_string()),
            };
            let es = match eigendecompose(&h, &ToleranceSet::for_matrix(&h)) {
                Ok(es) => es,
                Err(e) => return failed(e.to_string()),
            };
            let state = match cfg.state.build(&es) {
                Ok(v) => v,
                Err(e) => return failed(e.to_string()),
            };
            cfg.gauges
                .iter()
                .map(|gauge| {
                    let value = apply_gauge(&es, &cfg.effective_gauge(gauge)).and_then(|basis| {
                        match cfg.inner_product {
                            InnerProductKind::Biorthogonal => basis.expectation(&h, &state),
                            InnerProductKind::CanonicalMetric => {
                                GramMetric::canonical(basis.eigensystem())?.expectation(&h, &state)
                            }
                        }
                    });
                    let (value, status) = match value {
                        Ok(v) => (Some(v), "ok".to_string()),
                        Err(e) => (None, format!("failed: {e}")),
                    };
                    SweepRow {
                        gamma,
                        gauge: gauge.label(),
                        value,
                        status,
                    }
                })
                .collect()
        })
        .collect();

    let metadata = vec![
        ("model".to_string(), model_label(cfg)),
        ("sites".to_string(), cfg.dimension()?.to_string()),
        (
            "inner_product".to_string(),
            cfg.inner_product.label().to_string(),
        ),
        ("state".to_string(), cfg.state.label()),
        ("seed".to_string(), cfg.seed.to_string()),
    ];
    Ok(SweepTable {
        metadata,
        rows: blocks.into_iter().flatten().collect(),
    })
}

fn model_label(cfg: &ExperimentConfig) -> String {
    match &cfg.model {
        super::config::ModelSpec::HatanoNelson {
            similarity_diagonal: None,
            ..
        } => "hatano_nelson".into(),
        super::config::ModelSpec::HatanoNelson { .. } => {
            "hatano_nelson similarity-transformed".into()
        }
        super::config::ModelSpec::MatrixFile(path) => format!("matrix_file {}", path.display()),
    }
}
