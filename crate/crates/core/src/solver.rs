//! Discrete stationary equation
//! `-kappa Lap_h phi + (beta - hbar lambda) phi + g phi^3 = 0`, its Jacobian,
//! damped Newton, and multi-start search for distinct solutions.

use rayon::prelude::*;

use crate::error::{QptError, Result};
use crate::model::{l2_distance, particle_number, Domain, GridFunction, PhysicalParams};
use crate::spectral::apply_neg_laplacian;
use crate::tridiag::Tridiagonal;

/// Armijo constant for the sup-norm line search.
const SUFFICIENT_DECREASE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonSettings {
    /// Sup-norm of the residual required for convergence.
    pub tol_residual: f64,
    /// Sup-norm of the final Newton update, relative to `max(1, sup |phi|)`.
    pub tol_step: f64,
    pub max_iter: usize,
    /// Backtracking factor in `(0, 1)`.
    pub damping: f64,
    /// Smallest line-search fraction before giving up.
    pub min_step: f64,
}

impl Default for NewtonSettings {
    fn default() -> Self {
        Self {
            tol_residual: 1e-10,
            tol_step: 1e-10,
            max_iter: 50,
            damping: 0.5,
            min_step: 1e-12,
        }
    }
}

impl NewtonSettings {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(QptError::InvalidInput(format!(
                    "{name} must be positive, got {v}"
                )))
            }
        };
        positive("tol_residual", self.tol_residual)?;
        positive("tol_step", self.tol_step)?;
        positive("min_step", self.min_step)?;
        if !(self.damping > 0.0 && self.damping < 1.0) {
            return Err(QptError::InvalidInput(format!(
                "damping must lie in (0, 1), got {}",
                self.damping
            )));
        }
        if self.max_iter == 0 {
            return Err(QptError::InvalidInput("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

/// A converged stationary state.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub phi: GridFunction,
    pub beta: f64,
    pub residual_norm: f64,
    pub newton_iters: usize,
}

/// Pointwise residual of the discrete stationary equation.
pub fn residual(
    phi: &GridFunction,
    beta: f64,
    p: &PhysicalParams,
    d: &Domain,
) -> Result<GridFunction> {
    d.check(phi)?;
    let kappa = p.kappa();
    let shift = beta - p.energy();
    let g = p.g();
    let lap = apply_neg_laplacian(phi.values(), d.h());
    Ok(GridFunction::new(
        phi.values()
            .iter()
            .zip(lap)
            .map(|(&v, l)| kappa * l + shift * v + g * v * v * v)
            .collect(),
    ))
}

/// `kappa (-Lap_h) + diag(beta - hbar lambda + 3 g phi_i^2)`.
pub fn jacobian(
    phi: &GridFunction,
    beta: f64,
    p: &PhysicalParams,
    d: &Domain,
) -> Result<Tridiagonal> {
    d.check(phi)?;
    let n = d.n_interior();
    let c = p.kappa() / (d.h() * d.h());
    let shift = beta - p.energy();
    let g3 = 3.0 * p.g();
    let diag = phi
        .values()
        .iter()
        .map(|v| 2.0 * c + shift + g3 * v * v)
        .collect();
    Tridiagonal::symmetric(diag, vec![-c; n - 1])
}

/// Damped Newton with backtracking on the residual sup-norm.
///
/// Smallest residual the evaluation can resolve at `phi`: the stencil and the
/// cubic term cancel terms of size `scale * sup|phi|`.
fn roundoff_floor(phi: &GridFunction, beta: f64, p: &PhysicalParams, d: &Domain) -> f64 {
    let sup = phi.sup_norm();
    let scale =
        4.0 * p.kappa() / (d.h() * d.h()) + (beta - p.energy()).abs() + p.g().abs() * sup * sup;
    2.0 * f64::EPSILON * scale * sup
}

/// Converged means the residual is below `tol_residual` and the next Newton
/// update is below `tol_step`; both are needed so slow sublinear creep toward
/// a degenerate root is not mistaken for convergence.
pub fn newton_solve(
    seed: &GridFunction,
    beta: f64,
    p: &PhysicalParams,
    d: &Domain,
    s: &NewtonSettings,
) -> Result<Solution> {
    s.validate()?;
    let mut phi = seed.clone();
    let mut f = residual(&phi, beta, p, d)?;
    let mut r = f.sup_norm();
    if !r.is_finite() {
        return Err(QptError::InvalidInput(
            "seed produces a non-finite residual".into(),
        ));
    }

    for iter in 0..=s.max_iter {
        let tol = s.tol_residual.max(roundoff_floor(&phi, beta, p, d));
        let done = |phi: GridFunction, r: f64| Solution {
            phi,
            beta,
            residual_norm: r,
            newton_iters: iter,
        };
        if r == 0.0 {
            return Ok(done(phi, r));
        }
        let rhs: Vec<f64> = f.values().iter().map(|v| -v).collect();
        let step = match jacobian(&phi, beta, p, d)?.solve(&rhs) {
            Ok(step) => GridFunction::new(step),
            Err(_) if r <= tol => return Ok(done(phi, r)),
            Err(e) => return Err(e),
        };
        if r <= tol && step.sup_norm() <= s.tol_step * phi.sup_norm().max(1.0) {
            return Ok(done(phi, r));
        }
        if iter == s.max_iter {
            break;
        }

        let mut t = 1.0;
        loop {
            let trial = phi.axpy(t, &step);
            let ft = residual(&trial, beta, p, d)?;
            let rt = ft.sup_norm();
            if rt <= (1.0 - SUFFICIENT_DECREASE * t) * r || rt <= tol {
                phi = trial;
                f = ft;
                r = rt;
                break;
            }
            t *= s.damping;
            if t < s.min_step {
                if r <= tol {
                    return Ok(done(phi, r));
                }
                return Err(QptError::StepUnderflow { residual: r });
            }
        }
    }
    Err(QptError::MaxIterations {
        iterations: s.max_iter,
        residual: r,
    })
}

/// Runs Newton from every seed and keeps the distinct nontrivial solutions.
///
/// Seeds are solved in parallel; survivors are de-duplicated in seed order
/// by L2 distance `<= 1e-4 max(1, ||phi||)`, and the trivial state is dropped.
pub fn deflated_search(
    seeds: &[GridFunction],
    beta: f64,
    p: &PhysicalParams,
    d: &Domain,
    s: &NewtonSettings,
) -> Vec<Solution> {
    let converged: Vec<Option<Solution>> = seeds
        .par_iter()
        .map(|seed| newton_solve(seed, beta, p, d, s).ok())
        .collect();

    let mut kept: Vec<Solution> = Vec::new();
    for sol in converged.into_iter().flatten() {
        let Ok(n) = particle_number(&sol.phi, d) else {
            continue;
        };
        let norm = n.sqrt();
        let tol = dedup_tolerance(norm);
        if norm <= tol {
            continue;
        }
        let duplicate = kept.iter().any(|k| {
            l2_distance(&k.phi, &sol.phi, d)
                .map(|dist| dist <= tol)
                .unwrap_or(false)
        });
        if !duplicate {
            kept.push(sol);
        }
    }
    kept
}

/// De-duplication radius for a solution of L2 norm `norm`.
pub fn dedup_tolerance(norm: f64) -> f64 {
    1e-4 * norm.max(1.0)
}
