//! Physical constants, the discretized interval, and grid functions with the
//! quadratures every other module is built on.
//!
//! Grid functions carry interior samples only. The Dirichlet endpoints are
//! implicitly zero, so the trapezoid rule reduces to `h * sum`.

use crate::error::{QptError, Result};

/// Model constants of the stationary equation.
///
/// The kinetic coefficient `kappa = hbar^2 / (4 m)` is derived on demand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    hbar: f64,
    mass: f64,
    g: f64,
    lambda: f64,
}

impl PhysicalParams {
    pub fn new(hbar: f64, mass: f64, g: f64, lambda: f64) -> Result<Self> {
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(QptError::InvalidInput(format!(
                "hbar must be positive, got {hbar}"
            )));
        }
        if !(mass.is_finite() && mass > 0.0) {
            return Err(QptError::InvalidInput(format!(
                "mass must be positive, got {mass}"
            )));
        }
        if !g.is_finite() || g == 0.0 {
            return Err(QptError::InvalidInput(format!(
                "g must be finite and nonzero, got {g}"
            )));
        }
        if !lambda.is_finite() {
            return Err(QptError::InvalidInput(format!(
                "lambda must be finite, got {lambda}"
            )));
        }
        Ok(Self {
            hbar,
            mass,
            g,
            lambda,
        })
    }

    /// hbar = 1, m = 1/4 (so kappa = 1), g = 1, lambda = 0.
    pub fn standard() -> Self {
        Self {
            hbar: 1.0,
            mass: 0.25,
            g: 1.0,
            lambda: 0.0,
        }
    }

    /// The non-interacting limit `g = 0`.
    ///
    /// Not a valid model for the bifurcation analysis (the reduced cubic
    /// degenerates); it exists for linear reference runs and cross-checks.
    pub fn non_interacting(hbar: f64, mass: f64, lambda: f64) -> Result<Self> {
        let p = Self::new(hbar, mass, 1.0, lambda)?;
        Ok(Self { g: 0.0, ..p })
    }

    pub fn is_interacting(&self) -> bool {
        self.g != 0.0
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Energy `E = hbar * lambda`.
    pub fn energy(&self) -> f64 {
        self.hbar * self.lambda
    }

    pub fn kappa(&self) -> f64 {
        self.hbar * self.hbar / (4.0 * self.mass)
    }

    pub fn with_g(self, g: f64) -> Result<Self> {
        Self::new(self.hbar, self.mass, g, self.lambda)
    }

    pub fn with_lambda(self, lambda: f64) -> Result<Self> {
        Self::new(self.hbar, self.mass, self.g, lambda)
    }
}

/// The interval `[0, L]` with `n_interior` equally spaced interior points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    length: f64,
    n_interior: usize,
}

impl Domain {
    pub fn new(length: f64, n_interior: usize) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(QptError::InvalidInput(format!(
                "length must be positive, got {length}"
            )));
        }
        if n_interior < 3 {
            return Err(QptError::InvalidInput(format!(
                "n_interior must be at least 3, got {n_interior}"
            )));
        }
        Ok(Self { length, n_interior })
    }

    /// `[0, pi]` with 1000 interior points.
    pub fn standard() -> Self {
        Self {
            length: std::f64::consts::PI,
            n_interior: 1000,
        }
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn n_interior(&self) -> usize {
        self.n_interior
    }

    pub fn h(&self) -> f64 {
        self.length / (self.n_interior + 1) as f64
    }

    /// Coordinate of grid point `i`, `0 <= i <= n_interior + 1`.
    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.h()
    }

    /// Coordinates of the interior points.
    pub fn interior_points(&self) -> impl Iterator<Item = f64> + '_ {
        (1..=self.n_interior).map(move |i| self.x(i))
    }

    pub(crate) fn check(&self, f: &GridFunction) -> Result<()> {
        if f.len() != self.n_interior {
            return Err(QptError::DimensionMismatch {
                expected: self.n_interior,
                actual: f.len(),
            });
        }
        Ok(())
    }
}

/// The control parameter `beta`, the depth of the box potential.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct BetaParam(f64);

impl BetaParam {
    pub fn new(beta: f64) -> Result<Self> {
        if !beta.is_finite() {
            return Err(QptError::InvalidInput(format!(
                "beta must be finite, got {beta}"
            )));
        }
        Ok(Self(beta))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Real samples of a function at the interior grid points.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GridFunction {
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            values: vec![0.0; n],
        }
    }

    /// Samples `f` at the interior points of `d`.
    pub fn from_fn(d: &Domain, f: impl Fn(f64) -> f64) -> Self {
        Self {
            values: d.interior_points().map(f).collect(),
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: f64, other: &GridFunction) -> Self {
        debug_assert_eq!(self.len(), other.len());
        Self {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + c * b)
                .collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == 0.0)
    }
}

impl std::ops::Neg for &GridFunction {
    type Output = GridFunction;

    fn neg(self) -> GridFunction {
        self.scaled(-1.0)
    }
}

/// Trapezoid-rule approximation of `int f g dx`.
pub fn l2_inner(f: &GridFunction, g: &GridFunction, d: &Domain) -> Result<f64> {
    d.check(f)?;
    d.check(g)?;
    Ok(d.h()
        * f.values
            .iter()
            .zip(&g.values)
            .map(|(a, b)| a * b)
            .sum::<f64>())
}

/// Discrete L2 distance between two grid functions.
pub fn l2_distance(f: &GridFunction, g: &GridFunction, d: &Domain) -> Result<f64> {
    d.check(f)?;
    d.check(g)?;
    let diff = f.axpy(-1.0, g);
    Ok(l2_inner(&diff, &diff, d)?.sqrt())
}

/// Particle number `N = int phi^2 dx`.
pub fn particle_number(phi: &GridFunction, d: &Domain) -> Result<f64> {
    l2_inner(phi, phi, d)
}

/// `int |grad phi|^2 dx` from edge differences, including the two boundary
/// edges against the zero Dirichlet values. Equals `<phi, -Lap_h phi>`.
pub(crate) fn dirichlet_energy(values: &[f64], h: f64) -> f64 {
    let mut acc = 0.0;
    let mut prev = 0.0;
    for &v in values {
        let dv = v - prev;
        acc += dv * dv;
        prev = v;
    }
    acc += prev * prev;
    acc / h
}

/// Hamiltonian energy of a real state:
/// `H = int [ kappa |grad phi|^2 + beta phi^2 + (g/2) phi^4 ] dx`.
pub fn hamiltonian_energy(
    phi: &GridFunction,
    beta: f64,
    p: &PhysicalParams,
    d: &Domain,
) -> Result<f64> {
    d.check(phi)?;
    let h = d.h();
    let kinetic = p.kappa() * dirichlet_energy(&phi.values, h);
    let (quad, quart) = phi.values.iter().fold((0.0, 0.0), |(q, r), v| {
        let v2 = v * v;
        (q + v2, r + v2 * v2)
    });
    Ok(kinetic + h * (beta * quad + 0.5 * p.g() * quart))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn pi_domain(n: usize) -> Domain {
        Domain::new(PI, n).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(PhysicalParams::new(0.0, 1.0, 1.0, 0.0).is_err());
        assert!(PhysicalParams::new(1.0, -1.0, 1.0, 0.0).is_err());
        assert!(PhysicalParams::new(1.0, 1.0, 0.0, 0.0).is_err());
        let p = PhysicalParams::new(2.0, 0.5, -1.0, 3.0).unwrap();
        assert_eq!(p.kappa(), 2.0);
        assert_eq!(p.energy(), 6.0);
        assert_eq!(PhysicalParams::standard().kappa(), 1.0);
        assert!(Domain::new(1.0, 2).is_err());
        assert!(Domain::new(-1.0, 10).is_err());
        assert!(BetaParam::new(f64::NAN).is_err());
        assert_eq!(BetaParam::new(0.0).unwrap().value(), 0.0);
    }

    #[test]
    fn grid_endpoints() {
        let d = pi_domain(999);
        assert_eq!(d.x(0), 0.0);
        assert!((d.x(1000) - PI).abs() < 1e-15);
        assert_eq!(d.interior_points().count(), 999);
    }

    #[test]
    fn l2_inner_normalized_sine() {
        let d = pi_domain(999);
        let f = GridFunction::from_fn(&d, |x| (2.0 / PI).sqrt() * x.sin());
        assert!((l2_inner(&f, &f, &d).unwrap() - 1.0).abs() < 1e-5);
    }

    #[test]
    fn l2_inner_zero_and_orthogonal() {
        let d = pi_domain(999);
        let s1 = GridFunction::from_fn(&d, f64::sin);
        let s2 = GridFunction::from_fn(&d, |x| (2.0 * x).sin());
        assert_eq!(l2_inner(&GridFunction::zeros(999), &s1, &d).unwrap(), 0.0);
        assert!(l2_inner(&s1, &s2, &d).unwrap().abs() < 1e-8);
    }

    #[test]
    fn l2_inner_dimension_mismatch() {
        let d = pi_domain(10);
        let err = l2_inner(&GridFunction::zeros(10), &GridFunction::zeros(9), &d).unwrap_err();
        assert_eq!(
            err,
            QptError::DimensionMismatch {
                expected: 10,
                actual: 9
            }
        );
    }

    #[test]
    fn particle_number_of_scaled_mode() {
        let d = pi_domain(1000);
        let e1 = GridFunction::from_fn(&d, |x| (2.0 / PI).sqrt() * x.sin());
        for c in [0.0, 0.3, 2.5] {
            let n = particle_number(&e1.scaled(c), &d).unwrap();
            assert!((n - c * c).abs() < 1e-6);
        }
    }

    #[test]
    fn energy_of_first_mode() {
        let d = Domain::standard();
        let p = PhysicalParams::standard();
        let e1 = GridFunction::from_fn(&d, |x| (2.0 / PI).sqrt() * x.sin());
        let h = hamiltonian_energy(&e1, -0.5, &p, &d).unwrap();
        let expected = 1.0 - 0.5 + 0.5 * 3.0 / (2.0 * PI);
        assert!((h - expected).abs() < 1e-3, "{h} vs {expected}");
        assert_eq!(
            hamiltonian_energy(&GridFunction::zeros(1000), -0.5, &p, &d).unwrap(),
            0.0
        );
    }

    #[test]
    fn energy_is_quadratic_without_interaction() {
        let d = pi_domain(200);
        let p = PhysicalParams::non_interacting(1.0, 0.25, 0.0).unwrap();
        assert!(!p.is_interacting());
        let phi = GridFunction::from_fn(&d, |x| x.sin() * (1.0 + x).ln());
        let h1 = hamiltonian_energy(&phi, 0.7, &p, &d).unwrap();
        let h2 = hamiltonian_energy(&phi.scaled(2.0), 0.7, &p, &d).unwrap();
        assert!((h2 - 4.0 * h1).abs() < 1e-12 * h2.abs().max(1.0));
    }

    #[test]
    fn dirichlet_energy_matches_laplacian_form() {
        let d = pi_domain(50);
        let phi = GridFunction::from_fn(&d, |x| x * (PI - x) * (3.0 * x).cos());
        let h = d.h();
        let v = phi.values();
        let n = v.len();
        let mut lap = 0.0;
        for i in 0..n {
            let l = if i > 0 { v[i - 1] } else { 0.0 };
            let r = if i + 1 < n { v[i + 1] } else { 0.0 };
            lap += v[i] * (2.0 * v[i] - l - r) / (h * h);
        }
        assert!((dirichlet_energy(v, h) - h * lap).abs() < 1e-10);
    }

    #[test]
    fn quadrature_refinement_is_at_least_second_order() {
        // Exact value of int_0^pi (x (pi - x))^2 e^x dx is not needed: use
        // successive differences.
        let f = |x: f64| x * (PI - x) * (0.5 * x).exp();
        let value = |n: usize| {
            let d = pi_domain(n);
            let g = GridFunction::from_fn(&d, f);
            l2_inner(&g, &g, &d).unwrap()
        };
        let (a, b, c) = (value(249), value(499), value(999));
        let order = ((a - b) / (b - c)).abs().log2();
        // Dirichlet-vanishing integrands cancel the h^2 Euler-Maclaurin term,
        // so the observed order sits near 4.
        assert!(order >= 1.8, "order {order}");
    }

    proptest! {
        #[test]
        fn l2_inner_symmetric_bilinear(
            a in prop::collection::vec(-10.0f64..10.0, 16),
            b in prop::collection::vec(-10.0f64..10.0, 16),
            c in prop::collection::vec(-10.0f64..10.0, 16),
            s in -5.0f64..5.0,
        ) {
            let d = Domain::new(2.0, 16).unwrap();
            let (fa, fb, fc) = (GridFunction::new(a), GridFunction::new(b), GridFunction::new(c));
            let ab = l2_inner(&fa, &fb, &d).unwrap();
            prop_assert_eq!(ab, l2_inner(&fb, &fa, &d).unwrap());
            let lhs = l2_inner(&fa.axpy(s, &fc), &fb, &d).unwrap();
            let rhs = ab + s * l2_inner(&fc, &fb, &d).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs().max(rhs.abs()) * 100.0));
        }

        #[test]
        fn particle_number_nonnegative(a in prop::collection::vec(-10.0f64..10.0, 8)) {
            let d = Domain::new(1.0, 8).unwrap();
            let f = GridFunction::new(a);
            let n = particle_number(&f, &d).unwrap();
            prop_assert!(n >= 0.0);
            prop_assert_eq!(n == 0.0, f.is_zero());
        }

        #[test]
        fn energy_nonnegative_for_repulsive_nonnegative_beta(
            a in prop::collection::vec(-10.0f64..10.0, 12),
            beta in 0.0f64..5.0,
            g in 0.01f64..5.0,
        ) {
            let d = Domain::new(3.0, 12).unwrap();
            let p = PhysicalParams::new(1.0, 0.25, g, 0.3).unwrap();
            prop_assert!(hamiltonian_energy(&GridFunction::new(a), beta, &p, &d).unwrap() >= 0.0);
        }
    }
}
