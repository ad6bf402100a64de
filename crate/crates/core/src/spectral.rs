//! Dirichlet Laplacian eigenpairs on `[0, L]`.
//!
//! `analytic_modes` samples the closed forms, `numeric_modes` diagonalizes the
//! three-point stencil used by the solver. Both normalize with the trapezoid
//! rule and fix signs so the first interior sample is positive.

use crate::error::{QptError, Result};
use crate::model::{l2_inner, Domain, GridFunction};
use crate::tridiag::Tridiagonal;

/// One eigenpair of `-Lap` with its quartic overlap `alpha = int e^4 dx`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mode {
    pub k: usize,
    pub xi: f64,
    pub shape: GridFunction,
    pub alpha: f64,
}

impl Mode {
    fn from_shape(k: usize, xi: f64, shape: GridFunction, d: &Domain) -> Self {
        let alpha = quartic_overlap(&shape, d);
        Self {
            k,
            xi,
            shape,
            alpha,
        }
    }
}

/// `int f^4 dx` by the trapezoid rule.
pub fn quartic_overlap(f: &GridFunction, d: &Domain) -> f64 {
    d.h() * f.values().iter().map(|v| v.powi(4)).sum::<f64>()
}

/// The discrete `-Lap_h` on the interior points (no `kappa`).
pub fn laplacian_matrix(d: &Domain) -> Tridiagonal {
    let n = d.n_interior();
    let inv_h2 = 1.0 / (d.h() * d.h());
    Tridiagonal {
        lower: vec![-inv_h2; n - 1],
        diag: vec![2.0 * inv_h2; n],
        upper: vec![-inv_h2; n - 1],
    }
}

/// Applies `-Lap_h` with zero Dirichlet ghosts.
pub fn apply_neg_laplacian(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    let inv_h2 = 1.0 / (h * h);
    (0..n)
        .map(|i| {
            let l = if i > 0 { values[i - 1] } else { 0.0 };
            let r = if i + 1 < n { values[i + 1] } else { 0.0 };
            (2.0 * values[i] - l - r) * inv_h2
        })
        .collect()
}

/// Closed-form modes `xi_k = (k pi / L)^2`, `e_k = sqrt(2/L) sin(k pi x / L)`.
pub fn analytic_modes(d: &Domain, count: usize) -> Vec<Mode> {
    let l = d.length();
    let amp = (2.0 / l).sqrt();
    (1..=count)
        .map(|k| {
            let wave = k as f64 * std::f64::consts::PI / l;
            let shape = GridFunction::from_fn(d, |x| amp * (wave * x).sin());
            Mode::from_shape(k, wave * wave, shape, d)
        })
        .collect()
}

/// Eigenpairs of the three-point Dirichlet stencil, ascending.
pub fn numeric_modes(d: &Domain, count: usize) -> Result<Vec<Mode>> {
    if count > d.n_interior() {
        return Err(QptError::InvalidInput(format!(
            "K exceeds grid resolution ({count} modes requested, {} interior points)",
            d.n_interior()
        )));
    }
    let matrix = laplacian_matrix(d);
    let sqrt_h = d.h().sqrt();
    (0..count)
        .map(|index| {
            let xi = matrix.symmetric_eigenvalue(index)?;
            let mut v = matrix.symmetric_eigenvector(xi)?;
            // Euclidean-unit vector -> trapezoid-unit function.
            let sign = if v.iter().find(|x| x.abs() > 0.0).copied().unwrap_or(1.0) < 0.0 {
                -1.0
            } else {
                1.0
            };
            v.iter_mut().for_each(|x| *x *= sign / sqrt_h);
            let shape = GridFunction::new(v);
            let norm = l2_inner(&shape, &shape, d)?;
            if (norm - 1.0).abs() > 1e-10 {
                return Err(QptError::Eigensolver(format!(
                    "mode {} normalization drifted to {norm}",
                    index + 1
                )));
            }
            Ok(Mode::from_shape(index + 1, xi, shape, d))
        })
        .collect()
}

/// Closed-form eigenvalue of the discrete stencil, `(2/h^2)(1 - cos(k pi h / L))`.
pub fn discrete_eigenvalue(d: &Domain, k: usize) -> f64 {
    let h = d.h();
    2.0 / (h * h) * (1.0 - (k as f64 * std::f64::consts::PI * h / d.length()).cos())
}
