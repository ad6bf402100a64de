//! Leading-order Lyapunov-Schmidt theory of the stationary equation.
//!
//! Projecting onto the critical mode `e_k` gives the scalar cubic
//! `gamma_k(beta) x + g alpha_k x^3 = 0`. Its nontrivial roots seed the
//! bifurcating branches; the solver corrects the omitted higher-order terms.

use std::fmt;

use crate::error::{QptError, Result};
use crate::model::{GridFunction, PhysicalParams};
use crate::spectral::Mode;

/// Which of the two pitchfork branches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Minus,
    Plus,
}

impl Sign {
    pub const BOTH: [Sign; 2] = [Sign::Plus, Sign::Minus];

    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// `gamma x + g alpha x^3 = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedCubic {
    pub gamma: f64,
    pub g: f64,
    pub alpha: f64,
}

impl ReducedCubic {
    pub fn new(gamma: f64, g: f64, alpha: f64) -> Result<Self> {
        if !gamma.is_finite() {
            return Err(QptError::InvalidInput(format!(
                "gamma must be finite, got {gamma}"
            )));
        }
        if !g.is_finite() || g == 0.0 {
            return Err(QptError::InvalidInput(format!(
                "g must be finite and nonzero, got {g}"
            )));
        }
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(QptError::InvalidInput(format!(
                "alpha must be positive, got {alpha}"
            )));
        }
        Ok(Self { gamma, g, alpha })
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.gamma * x + self.g * self.alpha * x * x * x
    }

    /// Magnitude of the nontrivial roots, if they exist.
    pub fn nontrivial_amplitude(&self) -> Option<f64> {
        let ratio = -self.gamma / (self.g * self.alpha);
        (ratio > 0.0).then(|| ratio.sqrt())
    }
}

/// A zero of `gamma_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPoint {
    pub k: usize,
    pub beta_k: f64,
}

/// `gamma_k(beta) = kappa xi_k - hbar lambda + beta`, the `k`-th eigenvalue of
/// the linearization at the trivial state.
pub fn gamma(mode: &Mode, beta: f64, p: &PhysicalParams) -> f64 {
    (p.kappa() * mode.xi - p.energy()) + beta
}

/// `beta_k = hbar lambda - kappa xi_k`.
pub fn critical_beta(mode: &Mode, p: &PhysicalParams) -> CriticalPoint {
    CriticalPoint {
        k: mode.k,
        beta_k: -(p.kappa() * mode.xi - p.energy()),
    }
}

/// Real roots of the reduced cubic, ascending. Always contains `0`.
pub fn reduced_roots(c: &ReducedCubic) -> Vec<f64> {
    match c.nontrivial_amplitude() {
        Some(x) => vec![-x, 0.0, x],
        None => vec![0.0],
    }
}

/// Whether the mode-`k` branch exists at this `beta`: below `beta_k` for
/// repulsive `g`, above it for attractive `g`.
pub fn branch_exists(mode: &Mode, beta: f64, p: &PhysicalParams) -> bool {
    let gk = gamma(mode, beta, p);
    p.is_interacting() && gk / p.g() < 0.0
}

/// Leading-order branch state `x_k^sign e_k` with `x_k = sqrt(-gamma_k / (g alpha_k))`.
///
/// At `beta = beta_k` this is the zero function.
pub fn asymptotic_solution(
    mode: &Mode,
    beta: f64,
    sign: Sign,
    p: &PhysicalParams,
) -> Result<GridFunction> {
    let gk = gamma(mode, beta, p);
    if gk == 0.0 {
        return Ok(GridFunction::zeros(mode.shape.len()));
    }
    if !branch_exists(mode, beta, p) {
        return Err(QptError::NoBranch {
            k: mode.k,
            beta,
            g: p.g(),
        });
    }
    let cubic = ReducedCubic::new(gk, p.g(), mode.alpha)?;
    let x = cubic.nontrivial_amplitude().ok_or(QptError::NoBranch {
        k: mode.k,
        beta,
        g: p.g(),
    })?;
    Ok(mode.shape.scaled(sign.factor() * x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{particle_number, Domain};
    use crate::spectral::{analytic_modes, numeric_modes};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn setup() -> (Vec<Mode>, PhysicalParams, Domain) {
        let d = Domain::standard();
        (analytic_modes(&d, 6), PhysicalParams::standard(), d)
    }

    #[test]
    fn gamma_values() {
        let (modes, p, _) = setup();
        assert_eq!(gamma(&modes[0], -1.0, &p), 0.0);
        assert_eq!(gamma(&modes[1], -4.5, &p), -0.5);
    }

    #[test]
    fn critical_points() {
        let (modes, p, _) = setup();
        assert_eq!(critical_beta(&modes[0], &p).beta_k, -1.0);
        assert_eq!(critical_beta(&modes[2], &p).beta_k, -9.0);
        let shifted = PhysicalParams::new(1.0, 0.25, 1.0, 2.0).unwrap();
        assert_eq!(critical_beta(&modes[0], &shifted).beta_k, 1.0);
        for w in modes.windows(2) {
            assert!(critical_beta(&w[0], &p).beta_k > critical_beta(&w[1], &p).beta_k);
        }
    }

    #[test]
    fn gamma_vanishes_at_critical_point() {
        let d = Domain::new(2.7, 400).unwrap();
        let p = PhysicalParams::new(1.3, 0.7, -2.0, 0.37).unwrap();
        for m in numeric_modes(&d, 8)
            .unwrap()
            .iter()
            .chain(&analytic_modes(&d, 8))
        {
            assert_eq!(gamma(m, critical_beta(m, &p).beta_k, &p), 0.0);
        }
    }

    #[test]
    fn roots_examples() {
        let alpha = 3.0 / (2.0 * PI);
        assert_eq!(
            reduced_roots(&ReducedCubic::new(0.0, 1.0, alpha).unwrap()),
            vec![0.0]
        );
        assert_eq!(
            reduced_roots(&ReducedCubic::new(0.5, 1.0, alpha).unwrap()),
            vec![0.0]
        );
        let r = reduced_roots(&ReducedCubic::new(-0.5, 1.0, alpha).unwrap());
        assert_eq!(r.len(), 3);
        assert!((r[2] - 1.0233).abs() < 1e-4 && (r[0] + 1.0233).abs() < 1e-4);
        assert_eq!(r[1], 0.0);
        assert_eq!(
            reduced_roots(&ReducedCubic::new(0.5, -1.0, alpha).unwrap()).len(),
            3
        );
        assert!(ReducedCubic::new(1.0, 0.0, alpha).is_err());
        assert!(ReducedCubic::new(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn asymptotic_peak_amplitude() {
        let (modes, p, d) = setup();
        let phi = asymptotic_solution(&modes[0], -1.03, Sign::Plus, &p).unwrap();
        let x = (0.03 * 2.0 * PI / 3.0).sqrt();
        assert!((x - 0.2507).abs() < 1e-4);
        let peak = phi.values().iter().cloned().fold(f64::MIN, f64::max);
        assert!((peak - 0.2001).abs() < 1e-3, "peak {peak}");
        let n = particle_number(&phi, &d).unwrap();
        assert!((n - 0.0628).abs() < 1e-3, "N {n}");

        let minus = asymptotic_solution(&modes[0], -1.03, Sign::Minus, &p).unwrap();
        assert_eq!(minus, -&phi);
        assert!(asymptotic_solution(&modes[0], -1.0, Sign::Plus, &p)
            .unwrap()
            .is_zero());
    }

    #[test]
    fn asymptotic_wrong_side_is_no_branch() {
        let (modes, p, _) = setup();
        assert!(matches!(
            asymptotic_solution(&modes[0], 0.0, Sign::Plus, &p),
            Err(QptError::NoBranch { k: 1, .. })
        ));
        let attractive = p.with_g(-1.0).unwrap();
        assert!(asymptotic_solution(&modes[0], 0.0, Sign::Plus, &attractive).is_ok());
        assert!(asymptotic_solution(&modes[0], -2.0, Sign::Plus, &attractive).is_err());
    }

    #[test]
    fn amplitude_scales_as_square_root() {
        let (modes, p, _) = setup();
        for m in &modes[..3] {
            let bk = critical_beta(m, &p).beta_k;
            let a1 = asymptotic_solution(m, bk - 0.08, Sign::Plus, &p)
                .unwrap()
                .sup_norm();
            let a2 = asymptotic_solution(m, bk - 0.04, Sign::Plus, &p)
                .unwrap()
                .sup_norm();
            assert!((a2 / a1 - 0.5f64.sqrt()).abs() < 1e-10 * 0.5f64.sqrt());
        }
    }

    #[test]
    fn attractive_mirror_symmetry() {
        let (modes, p, _) = setup();
        let attractive = p.with_g(-1.0).unwrap();
        for m in &modes[..3] {
            let bk = critical_beta(m, &p).beta_k;
            for delta in [0.01, 0.3, 2.0] {
                let rep = asymptotic_solution(m, bk - delta, Sign::Plus, &p).unwrap();
                let att = asymptotic_solution(m, bk + delta, Sign::Plus, &attractive).unwrap();
                assert!(rep.axpy(-1.0, &att).sup_norm() < 1e-12);
            }
        }
    }

    proptest! {
        #[test]
        fn roots_satisfy_cubic(gamma in -5.0f64..5.0, g in 0.05f64..5.0, neg in any::<bool>(), alpha in 0.05f64..3.0) {
            let g = if neg { -g } else { g };
            let c = ReducedCubic::new(gamma, g, alpha).unwrap();
            let roots = reduced_roots(&c);
            prop_assert!(roots.contains(&0.0));
            prop_assert_eq!(roots.len() == 3, gamma / g < 0.0);
            for x in roots {
                prop_assert!(c.eval(x).abs() < 1e-12);
            }
        }

        #[test]
        fn existence_side(beta_off in 0.001f64..20.0, k in 0usize..6) {
            let (modes, p, _) = setup();
            let m = &modes[k];
            let bk = critical_beta(m, &p).beta_k;
            let attractive = p.with_g(-1.0).unwrap();
            prop_assert!(branch_exists(m, bk - beta_off, &p));
            prop_assert!(!branch_exists(m, bk + beta_off, &p));
            prop_assert!(branch_exists(m, bk + beta_off, &attractive));
            prop_assert!(!branch_exists(m, bk - beta_off, &attractive));
        }
    }
}
