//! Natural-parameter continuation of the bifurcating branches in `beta`,
//! branch comparison, state census, and bifurcation-diagram assembly.

use rayon::prelude::*;

use crate::error::{QptError, Result};
use crate::model::{
    hamiltonian_energy, l2_distance, l2_inner, particle_number, BetaParam, Domain, GridFunction,
    PhysicalParams,
};
use crate::reduced::{asymptotic_solution, branch_exists, critical_beta, Sign};
use crate::solver::{deflated_search, newton_solve, NewtonSettings, Solution};
use crate::spectral::{numeric_modes, Mode};

/// Smallest `beta` increment before continuation gives up.
pub const MIN_CONTINUATION_STEP: f64 = 1e-6;

/// A converged point on a branch together with its diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchPoint {
    pub beta: f64,
    pub solution: Solution,
    pub particle_number: f64,
    pub energy: f64,
    /// Signed projection `<phi, e_k>`.
    pub amplitude: f64,
    pub nodal_count: usize,
}

/// A continued family of solutions labelled by the mode and sign it
/// bifurcated with.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub k: usize,
    pub sign: Sign,
    pub beta_k: f64,
    /// Ordered away from `beta_k`.
    pub points: Vec<BranchPoint>,
}

impl Branch {
    /// Points with `lo <= beta <= hi`.
    pub fn restricted(&self, lo: f64, hi: f64) -> Branch {
        Branch {
            points: self
                .points
                .iter()
                .filter(|pt| pt.beta >= lo && pt.beta <= hi)
                .cloned()
                .collect(),
            ..self.clone()
        }
    }

    /// Drops the points within `delta` of the onset.
    pub fn without_onset(&self, delta: f64) -> Branch {
        Branch {
            points: self
                .points
                .iter()
                .filter(|pt| (pt.beta - self.beta_k).abs() >= delta)
                .cloned()
                .collect(),
            ..self.clone()
        }
    }

    pub fn beta_range(&self) -> Option<(f64, f64)> {
        let first = self.points.first()?.beta;
        let last = self.points.last()?.beta;
        Some((first.min(last), first.max(last)))
    }

    /// Linear interpolation of the branch state in `beta`.
    pub fn state_at(&self, beta: f64) -> Option<GridFunction> {
        let (lo, hi) = self.beta_range()?;
        if beta < lo || beta > hi {
            return None;
        }
        let pts = &self.points;
        if pts.len() == 1 {
            return Some(pts[0].solution.phi.clone());
        }
        // Betas are monotone; pick the bracketing pair.
        let idx = pts
            .windows(2)
            .position(|w| (w[0].beta - beta) * (w[1].beta - beta) <= 0.0)
            .unwrap_or(pts.len() - 2);
        let (a, b) = (&pts[idx], &pts[idx + 1]);
        let span = b.beta - a.beta;
        let t = if span == 0.0 {
            0.0
        } else {
            (beta - a.beta) / span
        };
        Some(a.solution.phi.scaled(1.0 - t).axpy(t, &b.solution.phi))
    }
}

/// Number of strict sign changes between consecutive samples above the
/// noise floor `1e-9 sup |phi|`.
pub fn nodal_count(phi: &GridFunction) -> usize {
    let floor = 1e-9 * phi.sup_norm();
    let mut count = 0;
    let mut last: Option<bool> = None;
    for &v in phi.values() {
        if v.abs() <= floor {
            continue;
        }
        let positive = v > 0.0;
        if last.is_some_and(|l| l != positive) {
            count += 1;
        }
        last = Some(positive);
    }
    count
}

fn branch_point(
    solution: Solution,
    mode: &Mode,
    p: &PhysicalParams,
    d: &Domain,
) -> Result<BranchPoint> {
    let phi = &solution.phi;
    Ok(BranchPoint {
        beta: solution.beta,
        particle_number: particle_number(phi, d)?,
        energy: hamiltonian_energy(phi, solution.beta, p, d)?,
        amplitude: l2_inner(phi, &mode.shape, d)?,
        nodal_count: nodal_count(phi),
        solution,
    })
}

fn nontrivial(sol: &Solution, d: &Domain) -> bool {
    particle_number(&sol.phi, d)
        .map(|n| n.sqrt() > 1e-8)
        .unwrap_or(false)
}

/// Continues the `(k, sign)` branch from its onset at `beta_k` to `beta_end`.
///
/// The first point sits `delta_0 = min(step, |beta_k - beta_end| / 10)` off
/// the critical point and is seeded by the leading-order state. Later points
/// are seeded by their predecessor; a failed Newton solve halves the step.
pub fn continue_branch(
    mode: &Mode,
    sign: Sign,
    beta_end: f64,
    step: f64,
    p: &PhysicalParams,
    d: &Domain,
    s: &NewtonSettings,
) -> Result<Branch> {
    let beta_end = BetaParam::new(beta_end)?.value();
    if !(step.is_finite() && step > 0.0) {
        return Err(QptError::InvalidInput(format!(
            "step must be positive, got {step}"
        )));
    }
    d.check(&mode.shape)?;
    let beta_k = critical_beta(mode, p).beta_k;
    let dir = if p.g() > 0.0 { -1.0 } else { 1.0 };
    if !p.is_interacting() || (beta_end - beta_k) * dir <= 0.0 {
        return Err(QptError::WrongSide {
            beta_k,
            beta_end,
            g: p.g(),
        });
    }
    let span = (beta_end - beta_k).abs();

    let mut points = Vec::new();
    let mut delta0 = step.min(span / 10.0);
    let first = loop {
        let beta = beta_k + dir * delta0;
        let seed = asymptotic_solution(mode, beta, sign, p)?;
        match newton_solve(&seed, beta, p, d, s) {
            Ok(sol) if nontrivial(&sol, d) => break sol,
            _ => {
                delta0 *= 0.5;
                if delta0 < MIN_CONTINUATION_STEP {
                    return Err(QptError::ContinuationStall {
                        beta,
                        min_step: MIN_CONTINUATION_STEP,
                    });
                }
            }
        }
    };
    points.push(branch_point(first, mode, p, d)?);

    let mut h = step;
    loop {
        let last = points.last().expect("branch has a first point");
        let current = last.beta;
        if current == beta_end {
            break;
        }
        let remaining = (beta_end - current).abs();
        // Land on beta_end instead of leaving a sliver step.
        let beta = if remaining <= 1.5 * h {
            beta_end
        } else {
            current + dir * h
        };
        match newton_solve(&last.solution.phi, beta, p, d, s) {
            Ok(sol) if nontrivial(&sol, d) => {
                points.push(branch_point(sol, mode, p, d)?);
                h = (2.0 * h).min(step);
            }
            _ => {
                h *= 0.5;
                if h < MIN_CONTINUATION_STEP {
                    return Err(QptError::ContinuationStall {
                        beta: current,
                        min_step: MIN_CONTINUATION_STEP,
                    });
                }
            }
        }
    }

    Ok(Branch {
        k: mode.k,
        sign,
        beta_k,
        points,
    })
}

/// Minimum L2 distance between two branches over their shared `beta` range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Separation {
    pub distance: f64,
    /// False when the branches share no `beta` values; `distance` is then infinite.
    pub overlap: bool,
    /// Where the minimum is attained.
    pub beta: f64,
}

/// Minimum over the union of both `beta` grids (restricted to the shared
/// range) of the distance between the linearly interpolated states.
pub fn branch_separation(b1: &Branch, b2: &Branch, d: &Domain) -> Result<Separation> {
    let no_overlap = Separation {
        distance: f64::INFINITY,
        overlap: false,
        beta: f64::NAN,
    };
    let (Some((lo1, hi1)), Some((lo2, hi2))) = (b1.beta_range(), b2.beta_range()) else {
        return Ok(no_overlap);
    };
    let (lo, hi) = (lo1.max(lo2), hi1.min(hi2));
    if lo > hi {
        return Ok(no_overlap);
    }
    let mut grid: Vec<f64> = b1
        .points
        .iter()
        .chain(&b2.points)
        .map(|pt| pt.beta)
        .filter(|b| *b >= lo && *b <= hi)
        .collect();
    grid.extend([lo, hi]);
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    let mut best = Separation {
        distance: f64::INFINITY,
        overlap: true,
        beta: lo,
    };
    for beta in grid {
        let (Some(u), Some(v)) = (b1.state_at(beta), b2.state_at(beta)) else {
            continue;
        };
        let dist = l2_distance(&u, &v, d)?;
        if dist < best.distance {
            best = Separation {
                distance: dist,
                overlap: true,
                beta,
            };
        }
    }
    Ok(best)
}

/// One solution counted by [`state_census`].
#[derive(Debug, Clone, PartialEq)]
pub struct CensusEntry {
    pub solution: Solution,
    pub particle_number: f64,
    pub energy: f64,
    pub nodal_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CensusReport {
    pub beta: f64,
    /// Number of critical points already crossed at this `beta`.
    pub j: usize,
    pub expected_min: usize,
    pub found_count: usize,
    pub solutions: Vec<CensusEntry>,
    /// Set for attractive `g`, where the count is the mirrored claim rather
    /// than the proved one.
    pub conjectured_by_symmetry: bool,
}

impl CensusReport {
    pub fn satisfied(&self) -> bool {
        self.found_count >= self.expected_min
    }
}

/// Counts the distinct nontrivial stationary states at `beta` reached from
/// the `2j` leading-order seeds of the branches that exist there.
pub fn state_census(
    beta: f64,
    max_mode: usize,
    p: &PhysicalParams,
    d: &Domain,
    s: &NewtonSettings,
) -> Result<CensusReport> {
    let beta = BetaParam::new(beta)?.value();
    if !p.is_interacting() {
        return Err(QptError::InvalidInput("census requires g != 0".into()));
    }
    let modes = numeric_modes(d, max_mode)?;
    if p.g() > 0.0 {
        let covered = modes
            .last()
            .is_some_and(|m| critical_beta(m, p).beta_k < beta);
        if !covered {
            return Err(QptError::InvalidInput(format!(
                "K={max_mode} is too small: need beta_K < beta={beta}"
            )));
        }
    }
    let active: Vec<&Mode> = modes.iter().filter(|m| branch_exists(m, beta, p)).collect();
    let seeds = active
        .iter()
        .flat_map(|m| Sign::BOTH.map(|sign| asymptotic_solution(m, beta, sign, p)))
        .collect::<Result<Vec<_>>>()?;
    let found = deflated_search(&seeds, beta, p, d, s);
    let solutions = found
        .into_iter()
        .map(|sol| {
            Ok(CensusEntry {
                particle_number: particle_number(&sol.phi, d)?,
                energy: hamiltonian_energy(&sol.phi, beta, p, d)?,
                nodal_count: nodal_count(&sol.phi),
                solution: sol,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let j = active.len();
    Ok(CensusReport {
        beta,
        j,
        expected_min: 2 * j,
        found_count: solutions.len(),
        solutions,
        conjectured_by_symmetry: p.g() < 0.0,
    })
}

/// One row of the bifurcation diagram table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagramRow {
    pub k: usize,
    pub sign: Sign,
    pub beta: f64,
    pub amplitude: f64,
    pub particle_number: f64,
    pub energy: f64,
    pub nodal_count: usize,
    pub residual_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagramBranch {
    pub k: usize,
    pub sign: Sign,
    pub beta_k: f64,
    pub outcome: Result<Branch>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagram {
    pub beta_min: f64,
    pub beta_max: f64,
    /// Ordered by `k`, then `+` before `-`.
    pub branches: Vec<DiagramBranch>,
}

impl Diagram {
    pub fn rows(&self) -> Vec<DiagramRow> {
        self.branches
            .iter()
            .filter_map(|b| b.outcome.as_ref().ok())
            .flat_map(|branch| {
                branch
                    .points
                    .iter()
                    .filter(|pt| pt.beta >= self.beta_min && pt.beta <= self.beta_max)
                    .map(|pt| DiagramRow {
                        k: branch.k,
                        sign: branch.sign,
                        beta: pt.beta,
                        amplitude: pt.amplitude,
                        particle_number: pt.particle_number,
                        energy: pt.energy,
                        nodal_count: pt.nodal_count,
                        residual_norm: pt.solution.residual_norm,
                    })
            })
            .collect()
    }

    pub fn failures(&self) -> impl Iterator<Item = (&DiagramBranch, &QptError)> {
        self.branches
            .iter()
            .filter_map(|b| b.outcome.as_ref().err().map(|e| (b, e)))
    }
}

/// Continues both branches of every mode `k <= max_mode` whose onset lies on
/// the far side of `[beta_min, beta_max]`'s outer end, and tabulates them.
/// A branch that fails is reported in place without stopping the others.
pub fn bifurcation_diagram(
    beta_min: f64,
    beta_max: f64,
    max_mode: usize,
    step: f64,
    p: &PhysicalParams,
    d: &Domain,
    s: &NewtonSettings,
) -> Result<Diagram> {
    let beta_min = BetaParam::new(beta_min)?.value();
    let beta_max = BetaParam::new(beta_max)?.value();
    if beta_min >= beta_max {
        return Err(QptError::InvalidInput(format!(
            "beta_min ({beta_min}) must be below beta_max ({beta_max})"
        )));
    }
    if !p.is_interacting() {
        return Err(QptError::InvalidInput("diagram requires g != 0".into()));
    }
    if !(step.is_finite() && step > 0.0) {
        return Err(QptError::InvalidInput(format!(
            "step must be positive, got {step}"
        )));
    }
    s.validate()?;
    let modes = numeric_modes(d, max_mode)?;
    let beta_end = if p.g() > 0.0 { beta_min } else { beta_max };
    let jobs: Vec<(&Mode, Sign, f64)> = modes
        .iter()
        .map(|m| (m, critical_beta(m, p).beta_k))
        .filter(|(_, bk)| {
            if p.g() > 0.0 {
                *bk > beta_min
            } else {
                *bk < beta_max
            }
        })
        .flat_map(|(m, bk)| Sign::BOTH.map(|sign| (m, sign, bk)))
        .collect();
    let branches = jobs
        .par_iter()
        .map(|&(m, sign, beta_k)| DiagramBranch {
            k: m.k,
            sign,
            beta_k,
            outcome: continue_branch(m, sign, beta_end, step, p, d, s),
        })
        .collect();
    Ok(Diagram {
        beta_min,
        beta_max,
        branches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::analytic_modes;

    fn setup() -> (Vec<Mode>, PhysicalParams, Domain) {
        let d = Domain::standard();
        (numeric_modes(&d, 4).unwrap(), PhysicalParams::standard(), d)
    }

    #[test]
    fn nodal_count_of_modes() {
        let d = Domain::new(std::f64::consts::PI, 400).unwrap();
        let modes = analytic_modes(&d, 4);
        assert_eq!(nodal_count(&modes[0].shape), 0);
        assert_eq!(nodal_count(&modes[3].shape), 3);
        assert_eq!(nodal_count(&GridFunction::zeros(400)), 0);
        // Samples at roundoff level around a node are ignored.
        let v = GridFunction::new(vec![1.0, 1e-12, -1e-12, 2.0, -3.0]);
        assert_eq!(nodal_count(&v), 1);
    }

    #[test]
    fn first_branch_to_minus_three() {
        let (modes, p, d) = setup();
        let b = continue_branch(
            &modes[0],
            Sign::Plus,
            -3.0,
            0.05,
            &p,
            &d,
            &NewtonSettings::default(),
        )
        .unwrap();
        assert!(
            (38..=42).contains(&b.points.len()),
            "{} points",
            b.points.len()
        );
        assert!(b.points.iter().all(|pt| pt.nodal_count == 0));
        assert_eq!(b.points.last().unwrap().beta, -3.0);
        for w in b.points.windows(2) {
            assert!(w[1].beta < w[0].beta);
            assert!(w[1].amplitude >= w[0].amplitude);
        }
    }

    #[test]
    fn second_branch_has_one_node() {
        let (modes, p, d) = setup();
        let b = continue_branch(
            &modes[1],
            Sign::Minus,
            -7.0,
            0.1,
            &p,
            &d,
            &NewtonSettings::default(),
        )
        .unwrap();
        assert!(b.points.iter().all(|pt| pt.nodal_count == 1));
        assert!(b.points.iter().all(|pt| pt.amplitude < 0.0));
    }

    #[test]
    fn onset_amplitude_matches_leading_order() {
        let (modes, p, d) = setup();
        let b = continue_branch(
            &modes[0],
            Sign::Plus,
            -1.05,
            0.005,
            &p,
            &d,
            &NewtonSettings::default(),
        )
        .unwrap();
        let first = &b.points[0];
        let delta = (first.beta - b.beta_k).abs();
        assert!((delta - 0.005).abs() < 1e-12);
        let predicted = (delta / (p.g() * modes[0].alpha)).sqrt();
        assert!((first.amplitude / predicted - 1.0).abs() < 0.02);
    }

    #[test]
    fn wrong_side_rejected() {
        let (modes, p, d) = setup();
        let s = NewtonSettings::default();
        assert!(matches!(
            continue_branch(&modes[0], Sign::Plus, 0.0, 0.05, &p, &d, &s),
            Err(QptError::WrongSide { .. })
        ));
        let attractive = p.with_g(-1.0).unwrap();
        assert!(matches!(
            continue_branch(&modes[0], Sign::Plus, -2.0, 0.05, &attractive, &d, &s),
            Err(QptError::WrongSide { .. })
        ));
    }

    #[test]
    fn attractive_branch_runs_upward() {
        let (modes, p, d) = setup();
        let attractive = p.with_g(-1.0).unwrap();
        let b = continue_branch(
            &modes[0],
            Sign::Plus,
            0.0,
            0.05,
            &attractive,
            &d,
            &NewtonSettings::default(),
        )
        .unwrap();
        for w in b.points.windows(2) {
            assert!(w[1].beta > w[0].beta);
        }
        assert!(b.points.iter().all(|pt| pt.nodal_count == 0));
    }

    #[test]
    fn separation_examples() {
        let (modes, p, d) = setup();
        let s = NewtonSettings::default();
        let plus = continue_branch(&modes[0], Sign::Plus, -2.0, 0.05, &p, &d, &s).unwrap();
        let minus = continue_branch(&modes[0], Sign::Minus, -2.0, 0.05, &p, &d, &s).unwrap();
        assert_eq!(branch_separation(&plus, &plus, &d).unwrap().distance, 0.0);
        let sep = branch_separation(&plus, &minus, &d).unwrap();
        let min_norm = plus
            .points
            .iter()
            .map(|pt| pt.particle_number.sqrt())
            .fold(f64::INFINITY, f64::min);
        assert!(
            (sep.distance - 2.0 * min_norm).abs() < 1e-12,
            "{} vs {}",
            sep.distance,
            2.0 * min_norm
        );

        let far = continue_branch(&modes[1], Sign::Plus, -6.0, 0.05, &p, &d, &s).unwrap();
        let none = branch_separation(&plus, &far, &d).unwrap();
        assert!(!none.overlap && none.distance.is_infinite());
    }

    #[test]
    fn census_examples() {
        let (_, p, d) = setup();
        let s = NewtonSettings::default();
        let c = state_census(-1.5, 4, &p, &d, &s).unwrap();
        assert_eq!((c.j, c.expected_min), (1, 2));
        assert!(c.satisfied() && !c.conjectured_by_symmetry);
        let c = state_census(-0.5, 4, &p, &d, &s).unwrap();
        assert_eq!((c.j, c.found_count), (0, 0));
        let c = state_census(-10.0, 4, &p, &d, &s).unwrap();
        assert_eq!(c.j, 3);
        assert!(c.found_count >= 6, "found {}", c.found_count);
        assert!(state_census(-20.0, 4, &p, &d, &s).is_err());
    }

    #[test]
    fn diagram_shapes() {
        let d = Domain::new(std::f64::consts::PI, 300).unwrap();
        let p = PhysicalParams::standard();
        let s = NewtonSettings::default();
        let diag = bifurcation_diagram(-10.0, 0.0, 3, 0.1, &p, &d, &s).unwrap();
        assert_eq!(diag.branches.len(), 6);
        assert_eq!(diag.failures().count(), 0);
        let rows = diag.rows();
        for k in 1..=3 {
            let onset = rows
                .iter()
                .filter(|r| r.k == k)
                .map(|r| r.beta)
                .fold(f64::MIN, f64::max);
            assert!((onset + (k * k) as f64).abs() < 0.15, "k={k} onset {onset}");
            let plus: Vec<_> = rows
                .iter()
                .filter(|r| r.k == k && r.sign == Sign::Plus)
                .collect();
            let minus: Vec<_> = rows
                .iter()
                .filter(|r| r.k == k && r.sign == Sign::Minus)
                .collect();
            assert_eq!(plus.len(), minus.len());
            for (a, b) in plus.iter().zip(&minus) {
                assert_eq!(a.beta, b.beta);
                assert_eq!(a.amplitude, -b.amplitude);
            }
        }
        let empty = bifurcation_diagram(-0.5, 0.0, 1, 0.1, &p, &d, &s).unwrap();
        assert!(empty.branches.is_empty() && empty.rows().is_empty());
        assert!(bifurcation_diagram(0.0, 0.0, 1, 0.1, &p, &d, &s).is_err());
    }
}
