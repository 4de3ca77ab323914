//! Complex Schur decomposition `A = Z T Z†` by Hessenberg reduction and single-shift QR.

use num_complex::Complex64;

use super::matrix::{CMatrix, ZERO};
use crate::error::{Error, Result};

const MAX_SWEEPS_PER_EIGENVALUE: usize = 60;
const EXCEPTIONAL_SHIFT_PERIOD: usize = 10;

/// Unitary `Z` and upper-triangular `T` with `A = Z T Z†`.
pub(crate) struct Schur {
    pub z: CMatrix,
    pub t: CMatrix,
}

/// Rotation `[[c, s], [−s̄, c]]` with real `c`, chosen to annihilate `y` in `(x, y)`.
#[derive(Clone, Copy)]
struct Givens {
    c: f64,
    s: Complex64,
}

impl Givens {
    fn annihilating(x: Complex64, y: Complex64) -> Self {
        let ax = x.norm();
        let rho = ax.hypot(y.norm());
        if rho == 0.0 {
            return Self { c: 1.0, s: ZERO };
        }
        if ax == 0.0 {
            return Self {
                c: 0.0,
                s: y.conj() / y.norm(),
            };
        }
        Self {
            c: ax / rho,
            s: (x / ax) * y.conj() / rho,
        }
    }

    /// Applies the rotation to rows `k`, `k + 1` over columns `cols`.
    fn rotate_rows(&self, m: &mut CMatrix, k: usize, cols: std::ops::Range<usize>) {
        for j in cols {
            let a = m[(k, j)];
            let b = m[(k + 1, j)];
            m[(k, j)] = a * self.c + self.s * b;
            m[(k + 1, j)] = -self.s.conj() * a + b * self.c;
        }
    }

    /// Applies the adjoint rotation from the right to columns `k`, `k + 1` over rows `rows`.
    fn rotate_cols(&self, m: &mut CMatrix, k: usize, rows: std::ops::Range<usize>) {
        for i in rows {
            let a = m[(i, k)];
            let b = m[(i, k + 1)];
            m[(i, k)] = a * self.c + self.s.conj() * b;
            m[(i, k + 1)] = -self.s * a + b * self.c;
        }
    }
}

/// Eigenvalue of the 2×2 block `[[a, b], [c, d]]` closest to `d`.
fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let p = (a - d) * 0.5;
    let bc = b * c;
    let disc = (p * p + bc).sqrt();
    let denom = if (p + disc).norm() >= (p - disc).norm() {
        p + disc
    } else {
        p - disc
    };
    if denom.norm() == 0.0 {
        d
    } else {
        d - bc / denom
    }
}

pub(crate) fn schur(a: &CMatrix) -> Result<Schur> {
    let n = a.nrows();
    let hess = a.clone().hessenberg();
    let (mut z, mut h) = hess.unpack();
    for j in 0..n {
        for i in j + 2..n {
            h[(i, j)] = ZERO;
        }
    }
    let eps = f64::EPSILON;
    let norm = h.norm();
    let mut hi = n.saturating_sub(1);
    let mut iterations = 0;
    let mut total = 0;
    while hi > 0 {
        // Locate the start of the unreduced block ending at `hi`.
        let mut lo = hi;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let mut scale = h[(lo - 1, lo - 1)].norm() + h[(lo, lo)].norm();
            if scale == 0.0 {
                scale = norm;
            }
            if sub <= eps * scale {
                h[(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            iterations = 0;
            continue;
        }
        iterations += 1;
        total += 1;
        if total > MAX_SWEEPS_PER_EIGENVALUE * n {
            return Err(Error::NoConvergence);
        }
        let shift = if iterations % EXCEPTIONAL_SHIFT_PERIOD == 0 {
            h[(hi, hi)] + 0.75 * h[(hi, hi - 1)].re.abs()
        } else {
            wilkinson_shift(
                h[(hi - 1, hi - 1)],
                h[(hi - 1, hi)],
                h[(hi, hi - 1)],
                h[(hi, hi)],
            )
        };

        // Implicit single-shift QR sweep over rows lo..=hi.
        for k in lo..hi {
            let (x, y) = if k == lo {
                (h[(lo, lo)] - shift, h[(lo + 1, lo)])
            } else {
                (h[(k, k - 1)], h[(k + 1, k - 1)])
            };
            let g = Givens::annihilating(x, y);
            let first_col = if k == lo { lo } else { k - 1 };
            g.rotate_rows(&mut h, k, first_col..n);
            g.rotate_cols(&mut h, k, 0..(k + 3).min(hi + 1));
            g.rotate_cols(&mut z, k, 0..n);
            if k > lo {
                h[(k + 1, k - 1)] = ZERO;
            }
        }
    }
    for j in 0..n {
        for i in j + 1..n {
            h[(i, j)] = ZERO;
        }
    }
    Ok(Schur { z, t: h })
}
