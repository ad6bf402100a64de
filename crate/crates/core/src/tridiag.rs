//! Tridiagonal matrices: products, banded LU with partial pivoting, and
//! symmetric eigenpairs by Sturm bisection plus inverse iteration.

use crate::error::{QptError, Result};

/// Relative pivot floor below which a factorization is reported singular.
pub const PIVOT_FLOOR: f64 = 1e-14;

/// An `n x n` tridiagonal matrix stored by its three diagonals.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    /// `A[i+1][i]`, length `n - 1`.
    pub lower: Vec<f64>,
    /// `A[i][i]`, length `n`.
    pub diag: Vec<f64>,
    /// `A[i][i+1]`, length `n - 1`.
    pub upper: Vec<f64>,
}

impl Tridiagonal {
    pub fn new(lower: Vec<f64>, diag: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let n = diag.len();
        if n == 0 || lower.len() + 1 != n || upper.len() + 1 != n {
            return Err(QptError::InvalidInput(format!(
                "tridiagonal bands of lengths {}/{}/{} are inconsistent",
                lower.len(),
                n,
                upper.len()
            )));
        }
        Ok(Self { lower, diag, upper })
    }

    pub fn symmetric(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        Self::new(off.clone(), diag, off)
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn is_symmetric(&self) -> bool {
        self.lower == self.upper
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.lower
            .iter()
            .chain(&self.diag)
            .chain(&self.upper)
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(x.len(), n, "vector length does not match matrix");
        (0..n)
            .map(|i| {
                let mut y = self.diag[i] * x[i];
                if i > 0 {
                    y += self.lower[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    y += self.upper[i] * x[i + 1];
                }
                y
            })
            .collect()
    }

    /// Solves `A x = rhs` by Gaussian elimination with partial pivoting.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        if rhs.len() != n {
            return Err(QptError::DimensionMismatch {
                expected: n,
                actual: rhs.len(),
            });
        }
        let floor = PIVOT_FLOOR * self.max_abs().max(f64::MIN_POSITIVE);
        let mut d = self.diag.clone();
        let mut du = self.upper.clone();
        // Holds the subdiagonal, then the second superdiagonal fill-in.
        let mut dl = self.lower.clone();
        let mut b = rhs.to_vec();

        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i].abs() <= floor {
                    return Err(QptError::SingularJacobian {
                        row: i,
                        pivot: d[i],
                    });
                }
                let fact = dl[i] / d[i];
                d[i + 1] -= fact * du[i];
                b[i + 1] -= fact * b[i];
                dl[i] = 0.0;
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                let temp = d[i + 1];
                d[i + 1] = du[i] - fact * temp;
                if i + 2 < n {
                    dl[i] = du[i + 1];
                    du[i + 1] = -fact * dl[i];
                } else {
                    dl[i] = 0.0;
                }
                du[i] = temp;
                let bi = b[i];
                b[i] = b[i + 1];
                b[i + 1] = bi - fact * b[i + 1];
            }
        }
        if d[n - 1].abs() <= floor {
            return Err(QptError::SingularJacobian {
                row: n - 1,
                pivot: d[n - 1],
            });
        }

        b[n - 1] /= d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - du[i] * b[i + 1] - dl[i] * b[i + 2]) / d[i];
        }
        if b.iter().any(|v| !v.is_finite()) {
            return Err(QptError::SingularJacobian {
                row: n - 1,
                pivot: d[n - 1],
            });
        }
        Ok(b)
    }

    /// Number of eigenvalues strictly below `x` (symmetric matrices only).
    pub fn sturm_count(&self, x: f64) -> usize {
        let n = self.dim();
        let tiny = f64::EPSILON * self.max_abs().max(f64::MIN_POSITIVE);
        let mut count = 0;
        let mut q = self.diag[0] - x;
        for i in 0..n {
            if i > 0 {
                let b = self.lower[i - 1];
                q = self.diag[i] - x - b * b / q;
            }
            if q == 0.0 {
                q = -tiny;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut r = 0.0;
            if i > 0 {
                r += self.lower[i - 1].abs();
            }
            if i + 1 < n {
                r += self.upper[i].abs();
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// The `index`-th smallest eigenvalue (0-based) of a symmetric matrix.
    pub fn symmetric_eigenvalue(&self, index: usize) -> Result<f64> {
        if !self.is_symmetric() {
            return Err(QptError::Eigensolver("matrix is not symmetric".into()));
        }
        if index >= self.dim() {
            return Err(QptError::Eigensolver(format!(
                "eigenvalue index {index} out of range for dimension {}",
                self.dim()
            )));
        }
        let (mut lo, mut hi) = self.gershgorin();
        let pad = f64::EPSILON * lo.abs().max(hi.abs()).max(1.0);
        lo -= pad;
        hi += pad;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.sturm_count(mid) > index {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
                break;
            }
        }
        let value = 0.5 * (lo + hi);
        if !value.is_finite() {
            return Err(QptError::Eigensolver(format!(
                "bisection for index {index} produced {value}"
            )));
        }
        Ok(value)
    }

    /// Unit (Euclidean) eigenvector for an accurately known eigenvalue of a
    /// symmetric matrix, by inverse iteration.
    pub fn symmetric_eigenvector(&self, eigenvalue: f64) -> Result<Vec<f64>> {
        let n = self.dim();
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        let mut shift = eigenvalue;
        let mut shifted = self.clone();
        let mut x: Vec<f64> = (0..n)
            .map(|i| 1.0 + 0.5 * ((i as f64) * 1.618_033_988_7).sin())
            .collect();
        normalize(&mut x);

        let mut nudges = 0;
        let mut iter = 0;
        while iter < 6 {
            for (s, a) in shifted.diag.iter_mut().zip(&self.diag) {
                *s = a - shift;
            }
            match shifted.solve(&x) {
                Ok(mut y) => {
                    normalize(&mut y);
                    x = y;
                    iter += 1;
                }
                Err(_) if nudges < 8 => {
                    // Exactly singular shift: move off it by a few ulps of the scale.
                    nudges += 1;
                    shift += 64.0 * f64::EPSILON * scale * nudges as f64;
                }
                Err(e) => return Err(QptError::Eigensolver(format!("inverse iteration: {e}"))),
            }
        }

        let ax = self.apply(&x);
        let resid = ax
            .iter()
            .zip(&x)
            .map(|(a, v)| (a - eigenvalue * v).abs())
            .fold(0.0_f64, f64::max);
        if !resid.is_finite() || resid > 1e-8 * scale {
            return Err(QptError::Eigensolver(format!(
                "inverse iteration residual {resid:e} for eigenvalue {eigenvalue}"
            )));
        }
        Ok(x)
    }
}

fn normalize(x: &mut [f64]) {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        x.iter_mut().for_each(|v| *v /= norm);
    }
}
