//! Time evolution of `i hbar psi_t = kappa (-Lap_h) psi + beta psi + g |psi|^2 psi`
//! and audits of the quantities it conserves.
//!
//! The integrator is Crank-Nicolson with the nonlinearity evaluated at the
//! midpoint state, i.e. the implicit midpoint rule. Every sweep solves a
//! Cayley system `(I + i tau A) psi' = (I - i tau A) psi` with a real
//! symmetric `A`, so the discrete norm is preserved whatever the sweep count.

use num_complex::Complex64;

use crate::error::{QptError, Result};
use crate::model::{dirichlet_energy, Domain, GridFunction, PhysicalParams};
use crate::spectral::apply_neg_laplacian;

/// `psi = re + i im` on the interior grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    pub re: GridFunction,
    pub im: GridFunction,
}

impl ComplexField {
    pub fn new(re: GridFunction, im: GridFunction) -> Result<Self> {
        if re.len() != im.len() {
            return Err(QptError::DimensionMismatch {
                expected: re.len(),
                actual: im.len(),
            });
        }
        Ok(Self { re, im })
    }

    pub fn from_real(phi: &GridFunction) -> Self {
        Self {
            re: phi.clone(),
            im: GridFunction::zeros(phi.len()),
        }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            re: GridFunction::zeros(n),
            im: GridFunction::zeros(n),
        }
    }

    pub fn len(&self) -> usize {
        self.re.len()
    }

    pub fn is_empty(&self) -> bool {
        self.re.is_empty()
    }

    pub fn modulus(&self) -> GridFunction {
        GridFunction::new(
            self.re
                .values()
                .iter()
                .zip(self.im.values())
                .map(|(a, b)| a.hypot(*b))
                .collect(),
        )
    }

    pub fn to_complex(&self) -> Vec<Complex64> {
        self.re
            .values()
            .iter()
            .zip(self.im.values())
            .map(|(a, b)| Complex64::new(*a, *b))
            .collect()
    }

    pub fn from_complex(z: &[Complex64]) -> Self {
        Self {
            re: GridFunction::new(z.iter().map(|c| c.re).collect()),
            im: GridFunction::new(z.iter().map(|c| c.im).collect()),
        }
    }

    pub fn sup_distance(&self, other: &ComplexField) -> f64 {
        self.to_complex()
            .iter()
            .zip(other.to_complex())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// The standing wave `e^{-i lambda t} phi` of a stationary state.
pub fn standing_wave(phi: &GridFunction, t: f64, p: &PhysicalParams) -> ComplexField {
    let (s, c) = (-p.lambda() * t).sin_cos();
    ComplexField {
        re: phi.scaled(c),
        im: phi.scaled(s),
    }
}

/// Particle number `int |psi|^2 dx`.
pub fn field_particle_number(psi: &ComplexField, d: &Domain) -> Result<f64> {
    d.check(&psi.re)?;
    d.check(&psi.im)?;
    Ok(d.h()
        * psi
            .re
            .values()
            .iter()
            .zip(psi.im.values())
            .map(|(a, b)| a * a + b * b)
            .sum::<f64>())
}

/// `H = int [kappa |grad psi|^2 + beta |psi|^2 + (g/2) |psi|^4] dx`.
pub fn field_energy(psi: &ComplexField, beta: f64, p: &PhysicalParams, d: &Domain) -> Result<f64> {
    d.check(&psi.re)?;
    d.check(&psi.im)?;
    let h = d.h();
    let kinetic =
        p.kappa() * (dirichlet_energy(psi.re.values(), h) + dirichlet_energy(psi.im.values(), h));
    let (quad, quart) =
        psi.re
            .values()
            .iter()
            .zip(psi.im.values())
            .fold((0.0, 0.0), |(q, r), (a, b)| {
                let m2 = a * a + b * b;
                (q + m2, r + m2 * m2)
            });
    Ok(kinetic + h * (beta * quad + 0.5 * p.g() * quart))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    CrankNicolson,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionSettings {
    pub dt: f64,
    pub n_steps: usize,
    pub scheme: Scheme,
    /// Keep a full snapshot every this many steps (the initial and final
    /// states are always kept).
    pub snapshot_every: usize,
    pub fixed_point_tol: f64,
    pub max_sweeps: usize,
}

impl EvolutionSettings {
    pub fn new(dt: f64, n_steps: usize) -> Result<Self> {
        let s = Self {
            dt,
            n_steps,
            scheme: Scheme::CrankNicolson,
            snapshot_every: n_steps.max(1),
            fixed_point_tol: 1e-12,
            max_sweeps: 50,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(QptError::InvalidInput(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if self.snapshot_every == 0 {
            return Err(QptError::InvalidInput(
                "snapshot_every must be at least 1".into(),
            ));
        }
        if self.fixed_point_tol.is_nan() || self.fixed_point_tol <= 0.0 || self.max_sweeps == 0 {
            return Err(QptError::InvalidInput(
                "fixed-point tolerance and sweep cap must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn total_time(&self) -> f64 {
        self.dt * self.n_steps as f64
    }
}

/// Per-step diagnostics and sampled states of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub particle_number: Vec<f64>,
    pub energy: Vec<f64>,
    /// `sup_x |psi(t)|`.
    pub sup_modulus: Vec<f64>,
    /// `sup_x | |psi(t)| - |psi(0)| |`.
    pub modulus_deviation: Vec<f64>,
    pub snapshots: Vec<(f64, ComplexField)>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> Option<&ComplexField> {
        self.snapshots.last().map(|(_, psi)| psi)
    }

    /// `max_t sup_x | |psi(t)| - |psi(0)| |`.
    pub fn max_modulus_deviation(&self) -> f64 {
        self.modulus_deviation.iter().copied().fold(0.0, f64::max)
    }
}

/// Solves a complex tridiagonal system with constant off-diagonal by the
/// Thomas algorithm. The matrices used here have Hermitian part `I`, so no
/// pivoting is needed.
fn solve_complex_tridiagonal(
    diag: &[Complex64],
    off: Complex64,
    rhs: &[Complex64],
) -> Vec<Complex64> {
    let n = diag.len();
    let mut c = vec![Complex64::new(0.0, 0.0); n];
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    let mut denom = diag[0];
    c[0] = off / denom;
    x[0] = rhs[0] / denom;
    for i in 1..n {
        denom = diag[i] - off * c[i - 1];
        c[i] = off / denom;
        x[i] = (rhs[i] - off * x[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        let next = x[i + 1];
        x[i] -= c[i] * next;
    }
    x
}

fn midpoint_potential(old: &ComplexField, guess: &ComplexField, beta: f64, g: f64) -> Vec<f64> {
    (0..old.len())
        .map(|i| {
            let re = 0.5 * (old.re.values()[i] + guess.re.values()[i]);
            let im = 0.5 * (old.im.values()[i] + guess.im.values()[i]);
            beta + g * (re * re + im * im)
        })
        .collect()
}

/// Fixed-point loop shared by both step forms: `solve(potential)` returns the
/// new state for a frozen midpoint potential.
fn iterate_midpoint(
    psi: &ComplexField,
    beta: f64,
    p: &PhysicalParams,
    tol: f64,
    max_sweeps: usize,
    step_index: usize,
    solve: impl Fn(&[f64]) -> ComplexField,
) -> Result<ComplexField> {
    let scale = psi.modulus().sup_norm();
    // Predictor: potential frozen at the current state.
    let mut guess = solve(&midpoint_potential(psi, psi, beta, p.g()));
    for _ in 0..max_sweeps {
        let next = solve(&midpoint_potential(psi, &guess, beta, p.g()));
        let change = next.sup_distance(&guess);
        if !change.is_finite() {
            break;
        }
        guess = next;
        if change <= tol * scale {
            return Ok(guess);
        }
    }
    Err(QptError::ImplicitStepDivergence {
        step: step_index,
        sweeps: max_sweeps,
    })
}

/// One implicit-midpoint step in complex form.
pub fn crank_nicolson_step(
    psi: &ComplexField,
    beta: f64,
    p: &PhysicalParams,
    d: &Domain,
    dt: f64,
) -> Result<ComplexField> {
    d.check(&psi.re)?;
    d.check(&psi.im)?;
    let s = EvolutionSettings::new(dt, 1)?;
    complex_step(psi, beta, p, d, &s, 0)
}

fn complex_step(
    psi: &ComplexField,
    beta: f64,
    p: &PhysicalParams,
    d: &Domain,
    s: &EvolutionSettings,
    step_index: usize,
) -> Result<ComplexField> {
    let tau = s.dt / (2.0 * p.hbar());
    let c = p.kappa() / (d.h() * d.h());
    let i_tau = Complex64::new(0.0, tau);
    let old = psi.to_complex();
    let lap_re = apply_neg_laplacian(psi.re.values(), d.h());
    let lap_im = apply_neg_laplacian(psi.im.values(), d.h());
    let solve = |v: &[f64]| {
        // (I + i tau A) x = (I - i tau A) psi, A = kappa (-Lap_h) + diag(v)
        let a_psi: Vec<Complex64> = (0..old.len())
            .map(|i| Complex64::new(lap_re[i], lap_im[i]) * p.kappa() + old[i] * v[i])
            .collect();
        let rhs: Vec<Complex64> = old.iter().zip(&a_psi).map(|(o, a)| o - i_tau * a).collect();
        let diag: Vec<Complex64> = v
            .iter()
            .map(|vi| Complex64::new(1.0, 0.0) + i_tau * (2.0 * c + vi))
            .collect();
        ComplexField::from_complex(&solve_complex_tridiagonal(&diag, -i_tau * c, &rhs))
    };
    iterate_midpoint(
        psi,
        beta,
        p,
        s.fixed_point_tol,
        s.max_sweeps,
        step_index,
        solve,
    )
}

type Block = [[f64; 2]; 2];

fn block_mul(a: &Block, b: &Block) -> Block {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}

fn block_vec(a: &Block, x: [f64; 2]) -> [f64; 2] {
    [
        a[0][0] * x[0] + a[0][1] * x[1],
        a[1][0] * x[0] + a[1][1] * x[1],
    ]
}

fn block_inv(a: &Block) -> Block {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    [
        [a[1][1] / det, -a[0][1] / det],
        [-a[1][0] / det, a[0][0] / det],
    ]
}

/// One implicit-midpoint step of the real Hamilton pair
/// `hbar u_t = A v`, `hbar v_t = -A u` with `A = kappa (-Lap_h) + beta + g (u^2 + v^2)`,
/// solved as a 2x2 block-tridiagonal system.
pub fn hamilton_split_step(
    psi: &ComplexField,
    beta: f64,
    p: &PhysicalParams,
    d: &Domain,
    dt: f64,
) -> Result<ComplexField> {
    d.check(&psi.re)?;
    d.check(&psi.im)?;
    let s = EvolutionSettings::new(dt, 1)?;
    let tau = dt / (2.0 * p.hbar());
    let c = p.kappa() / (d.h() * d.h());
    let n = psi.len();
    let (a, b) = (psi.re.values(), psi.im.values());
    let lap_a = apply_neg_laplacian(a, d.h());
    let lap_b = apply_neg_laplacian(b, d.h());
    let solve = |v: &[f64]| {
        // u - tau A v = a + tau A b,  v + tau A u = b - tau A a
        let rhs: Vec<[f64; 2]> = (0..n)
            .map(|i| {
                let ab = p.kappa() * lap_b[i] + v[i] * b[i];
                let aa = p.kappa() * lap_a[i] + v[i] * a[i];
                [a[i] + tau * ab, b[i] - tau * aa]
            })
            .collect();
        let off: Block = [[0.0, tau * c], [-tau * c, 0.0]];
        let diag = |i: usize| -> Block {
            let t = tau * (2.0 * c + v[i]);
            [[1.0, -t], [t, 1.0]]
        };
        let mut cp: Vec<Block> = Vec::with_capacity(n);
        let mut dp: Vec<[f64; 2]> = Vec::with_capacity(n);
        for i in 0..n {
            let (m, r) = if i == 0 {
                (diag(0), rhs[0])
            } else {
                let lc = block_mul(&off, &cp[i - 1]);
                let d_i = diag(i);
                let m = [
                    [d_i[0][0] - lc[0][0], d_i[0][1] - lc[0][1]],
                    [d_i[1][0] - lc[1][0], d_i[1][1] - lc[1][1]],
                ];
                let ld = block_vec(&off, dp[i - 1]);
                (m, [rhs[i][0] - ld[0], rhs[i][1] - ld[1]])
            };
            let inv = block_inv(&m);
            cp.push(block_mul(&inv, &off));
            dp.push(block_vec(&inv, r));
        }
        let mut x = vec![[0.0; 2]; n];
        x[n - 1] = dp[n - 1];
        for i in (0..n - 1).rev() {
            let cx = block_vec(&cp[i], x[i + 1]);
            x[i] = [dp[i][0] - cx[0], dp[i][1] - cx[1]];
        }
        ComplexField {
            re: GridFunction::new(x.iter().map(|z| z[0]).collect()),
            im: GridFunction::new(x.iter().map(|z| z[1]).collect()),
        }
    };
    iterate_midpoint(psi, beta, p, s.fixed_point_tol, s.max_sweeps, 0, solve)
}

/// Integrates from `psi0` for `e.n_steps` steps of size `e.dt`, recording the
/// particle number, energy and modulus diagnostics after every step.
pub fn evolve(
    psi0: &ComplexField,
    beta: f64,
    p: &PhysicalParams,
    d: &Domain,
    e: &EvolutionSettings,
) -> Result<Trajectory> {
    e.validate()?;
    d.check(&psi0.re)?;
    d.check(&psi0.im)?;
    let modulus0 = psi0.modulus();
    let mut traj = Trajectory {
        times: Vec::with_capacity(e.n_steps + 1),
        particle_number: Vec::with_capacity(e.n_steps + 1),
        energy: Vec::with_capacity(e.n_steps + 1),
        sup_modulus: Vec::with_capacity(e.n_steps + 1),
        modulus_deviation: Vec::with_capacity(e.n_steps + 1),
        snapshots: vec![(0.0, psi0.clone())],
    };
    let record = |t: f64, psi: &ComplexField, traj: &mut Trajectory| -> Result<()> {
        let modulus = psi.modulus();
        traj.times.push(t);
        traj.particle_number.push(field_particle_number(psi, d)?);
        traj.energy.push(field_energy(psi, beta, p, d)?);
        traj.sup_modulus.push(modulus.sup_norm());
        traj.modulus_deviation
            .push(modulus.axpy(-1.0, &modulus0).sup_norm());
        Ok(())
    };
    record(0.0, psi0, &mut traj)?;

    let mut psi = psi0.clone();
    for step in 1..=e.n_steps {
        psi = match e.scheme {
            Scheme::CrankNicolson => complex_step(&psi, beta, p, d, e, step)?,
        };
        let t = step as f64 * e.dt;
        record(t, &psi, &mut traj)?;
        if step % e.snapshot_every == 0 || step == e.n_steps {
            traj.snapshots.push((t, psi.clone()));
        }
    }
    Ok(traj)
}

/// Maximum drifts of `N` and `H` over a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConservationReport {
    pub drift_n: f64,
    pub drift_h: f64,
    /// False when `N(0) = 0` and `drift_n` is absolute.
    pub n_relative: bool,
}

/// `max_t |N(t) - N(0)| / N(0)` and `max_t |H(t) - H(0)| / max(|H(0)|, 1e-12)`.
pub fn conservation_report(traj: &Trajectory) -> Result<ConservationReport> {
    let (Some(&n0), Some(&h0)) = (traj.particle_number.first(), traj.energy.first()) else {
        return Err(QptError::InvalidInput("empty trajectory".into()));
    };
    let max_dev = |xs: &[f64], x0: f64| xs.iter().map(|x| (x - x0).abs()).fold(0.0, f64::max);
    let n_relative = n0 > 0.0;
    let drift_n = max_dev(&traj.particle_number, n0) / if n_relative { n0 } else { 1.0 };
    let drift_h = max_dev(&traj.energy, h0) / h0.abs().max(1e-12);
    Ok(ConservationReport {
        drift_n,
        drift_h,
        n_relative,
    })
}
