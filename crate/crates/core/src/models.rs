//! Lattice Hamiltonians and matrix file loading.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{matrix_to_json, parse_matrix, CMatrix, ComplexMatrix};

/// Open-boundary Hatano-Nelson chain with hopping `1 + γ` to the left neighbour (superdiagonal)
/// and `1 − γ` to the right neighbour (subdiagonal).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HatanoNelsonSpec {
    pub sites: usize,
    pub gamma: f64,
}

impl HatanoNelsonSpec {
    pub fn new(sites: usize, gamma: f64) -> Result<Self> {
        if sites < 2 {
            return Err(Error::InvalidSize { sites });
        }
        Ok(Self { sites, gamma })
    }
}

pub fn hatano_nelson(spec: &HatanoNelsonSpec) -> Result<ComplexMatrix> {
    let n = spec.sites;
    if n < 2 {
        return Err(Error::InvalidSize { sites: n });
    }
    let up = Complex64::new(1.0 + spec.gamma, 0.0);
    let down = Complex64::new(1.0 - spec.gamma, 0.0);
    ComplexMatrix::new(CMatrix::from_fn(n, n, |i, j| {
        if j == i + 1 {
            up
        } else if i == j + 1 {
            down
        } else {
            Complex64::new(0.0, 0.0)
        }
    }))
}

pub fn load_matrix(path: impl AsRef<Path>) -> Result<ComplexMatrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_matrix(&text)
}

pub fn save_matrix(path: impl AsRef<Path>, matrix: &ComplexMatrix) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, matrix_to_json(matrix)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_site_chain() {
        let h = hatano_nelson(&HatanoNelsonSpec::new(2, 0.5).unwrap()).unwrap();
        let expected = ComplexMatrix::from_real_rows(&[vec![0.0, 1.5], vec![0.5, 0.0]]).unwrap();
        assert_eq!(h, expected);
    }

    #[test]
    fn zero_asymmetry_is_exactly_hermitian() {
        let h = hatano_nelson(&HatanoNelsonSpec::new(7, 0.0).unwrap()).unwrap();
        assert_eq!(h.as_matrix(), &h.as_matrix().adjoint());
        let h = hatano_nelson(&HatanoNelsonSpec::new(7, 0.2).unwrap()).unwrap();
        assert!(!h.is_hermitian(1e-12));
    }

    #[test]
    fn single_site_is_rejected() {
        assert!(matches!(
            HatanoNelsonSpec::new(1, 0.1),
            Err(Error::InvalidSize { sites: 1 })
        ));
        let spec = HatanoNelsonSpec {
            sites: 0,
            gamma: 0.0,
        };
        assert!(matches!(
            hatano_nelson(&spec),
            Err(Error::InvalidSize { sites: 0 })
        ));
    }

    #[test]
    fn load_well_formed_and_malformed_files() {
        let dir = tempfile::tempdir().unwrap();
        let good = dir.path().join("good.json");
        fs::write(
            &good,
            r#"{"dim": 2, "re": [[0, 1.5], [0.5, 0]], "im": [[0, 0], [0, 1]]}"#,
        )
        .unwrap();
        let m = load_matrix(&good).unwrap();
        assert_eq!(m.as_matrix()[(1, 1)], Complex64::new(0.0, 1.0));

        let mismatch = dir.path().join("mismatch.json");
        fs::write(
            &mismatch,
            r#"{"dim": 2, "re": [[0, 1], [1, 0]], "im": [[0, 0]]}"#,
        )
        .unwrap();
        assert!(matches!(load_matrix(&mismatch), Err(Error::Parse(_))));

        let rect = dir.path().join("rect.json");
        fs::write(
            &rect,
            r#"{"dim": 2, "re": [[0, 1, 2], [1, 0, 2]], "im": [[0, 0, 0], [0, 0, 0]]}"#,
        )
        .unwrap();
        assert!(matches!(
            load_matrix(&rect),
            Err(Error::NonSquare { rows: 2, cols: 3 })
        ));

        assert!(matches!(
            load_matrix(dir.path().join("absent.json")),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn save_then_load() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("hn.json");
        let h = hatano_nelson(&HatanoNelsonSpec::new(5, 0.3).unwrap()).unwrap();
        save_matrix(&path, &h).unwrap();
        assert_eq!(load_matrix(&path).unwrap(), h);
    }
}
