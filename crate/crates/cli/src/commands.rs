//! One function per subcommand. Each returns the table to write and how the
//! run ended.

use qpt_core::continuation::bifurcation_diagram;
use qpt_core::dynamics::{conservation_report, evolve, ComplexField};
use qpt_core::spectral::discrete_eigenvalue;
use qpt_core::{
    analytic_modes, branch_exists, continue_branch, critical_beta, numeric_modes, state_census,
    GridFunction, QptError, Sign,
};

use crate::config::{Initial, RunConfig};
use crate::error::CliError;
use crate::output::{Cell, Report};

/// How a run that produced output ended.
#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Success,
    /// The census found fewer states than the lower bound.
    Shortfall,
    /// Some part of the computation failed; the table holds what succeeded.
    Failed(Vec<String>),
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        match self {
            Outcome::Success => 0,
            Outcome::Shortfall => 1,
            Outcome::Failed(_) => 3,
        }
    }
}

fn report(command: &'static str, c: &RunConfig, columns: Vec<&'static str>) -> Report {
    Report {
        command,
        config: c.entries(),
        result: Vec::new(),
        columns,
        rows: Vec::new(),
    }
}

pub fn spectrum(c: &RunConfig) -> Result<(Report, Outcome), CliError> {
    let d = c.domain()?;
    let numeric = numeric_modes(&d, c.k_max)?;
    let mut r = report(
        "spectrum",
        c,
        vec![
            "k",
            "xi_analytic",
            "xi_numeric",
            "alpha_analytic",
            "alpha_numeric",
        ],
    );
    for (a, n) in analytic_modes(&d, c.k_max).iter().zip(&numeric) {
        r.rows.push(vec![
            Cell::Int(a.k as i64),
            Cell::Float(a.xi),
            Cell::Float(n.xi),
            Cell::Float(a.alpha),
            Cell::Float(n.alpha),
        ]);
    }
    Ok((r, Outcome::Success))
}

pub fn critical_points(c: &RunConfig) -> Result<(Report, Outcome), CliError> {
    let p = c.params()?;
    let d = c.domain()?;
    let mut r = report(
        "critical-points",
        c,
        vec!["k", "xi", "beta_k", "beta_k_discrete"],
    );
    for m in analytic_modes(&d, c.k_max) {
        let discrete = p.energy() - p.kappa() * discrete_eigenvalue(&d, m.k);
        r.rows.push(vec![
            Cell::Int(m.k as i64),
            Cell::Float(m.xi),
            Cell::Float(critical_beta(&m, &p).beta_k),
            Cell::Float(discrete),
        ]);
    }
    Ok((r, Outcome::Success))
}

pub fn diagram(c: &RunConfig) -> Result<(Report, Outcome), CliError> {
    c.require_interaction("diagram")?;
    let p = c.params()?;
    let d = c.domain()?;
    let diagram = bifurcation_diagram(
        c.beta_min,
        c.beta_max,
        c.k_max,
        c.beta_step,
        &p,
        &d,
        &c.newton(),
    )?;
    let mut r = report(
        "diagram",
        c,
        vec![
            "k",
            "sign",
            "beta",
            "amplitude",
            "N",
            "H",
            "nodal_count",
            "residual_norm",
        ],
    );
    for row in diagram.rows() {
        r.rows.push(vec![
            Cell::Int(row.k as i64),
            Cell::Text(row.sign.to_string()),
            Cell::Float(row.beta),
            Cell::Float(row.amplitude),
            Cell::Float(row.particle_number),
            Cell::Float(row.energy),
            Cell::Int(row.nodal_count as i64),
            Cell::Float(row.residual_norm),
        ]);
    }
    r.result
        .push(("branches".into(), Cell::Int(diagram.branches.len() as i64)));
    let failures: Vec<String> = diagram
        .failures()
        .map(|(b, e)| {
            format!(
                "branch ({}, {}) from beta_k = {}: {e}",
                b.k, b.sign, b.beta_k
            )
        })
        .collect();
    for (i, f) in failures.iter().enumerate() {
        r.result
            .push((format!("failure_{}", i + 1), Cell::Text(f.clone())));
    }
    let outcome = if failures.is_empty() {
        Outcome::Success
    } else {
        Outcome::Failed(failures)
    };
    Ok((r, outcome))
}

pub fn census(c: &RunConfig) -> Result<(Report, Outcome), CliError> {
    c.require_interaction("census")?;
    let p = c.params()?;
    let d = c.domain()?;
    let census = state_census(c.beta, c.k_max, &p, &d, &c.newton()).map_err(|e| match e {
        QptError::InvalidInput(msg) => CliError::invalid("k_max", msg),
        e => e.into(),
    })?;
    let mut r = report(
        "census",
        c,
        vec![
            "index",
            "sign",
            "N",
            "H",
            "nodal_count",
            "sup_norm",
            "residual_norm",
        ],
    );
    r.result = vec![
        ("j".into(), Cell::Int(census.j as i64)),
        ("expected_min".into(), Cell::Int(census.expected_min as i64)),
        ("found".into(), Cell::Int(census.found_count as i64)),
        ("satisfied".into(), Cell::Bool(census.satisfied())),
        (
            "conjectured_by_symmetry".into(),
            Cell::Bool(census.conjectured_by_symmetry),
        ),
    ];
    for (i, e) in census.solutions.iter().enumerate() {
        r.rows.push(vec![
            Cell::Int(i as i64 + 1),
            Cell::Text(leading_sign(&e.solution.phi).to_string()),
            Cell::Float(e.particle_number),
            Cell::Float(e.energy),
            Cell::Int(e.nodal_count as i64),
            Cell::Float(e.solution.phi.sup_norm()),
            Cell::Float(e.solution.residual_norm),
        ]);
    }
    let outcome = if census.satisfied() {
        Outcome::Success
    } else {
        Outcome::Shortfall
    };
    Ok((r, outcome))
}

/// Sign of the first sample that stands above the noise.
fn leading_sign(phi: &GridFunction) -> Sign {
    let floor = 1e-9 * phi.sup_norm();
    match phi.values().iter().find(|v| v.abs() > floor) {
        Some(v) if *v < 0.0 => Sign::Minus,
        _ => Sign::Plus,
    }
}

fn initial_state(c: &RunConfig) -> Result<GridFunction, CliError> {
    let p = c.params()?;
    let d = c.domain()?;
    match c.initial {
        Initial::Zero => Ok(GridFunction::zeros(d.n_interior())),
        Initial::Mode => {
            let m = numeric_modes(&d, c.initial_k)?
                .pop()
                .expect("initial_k >= 1");
            Ok(m.shape.scaled(c.initial_amplitude))
        }
        Initial::Stationary => {
            c.require_interaction("initial = stationary")?;
            let m = numeric_modes(&d, c.initial_k)?
                .pop()
                .expect("initial_k >= 1");
            if !branch_exists(&m, c.beta, &p) {
                return Err(CliError::invalid(
                    "beta",
                    format!("no branch of mode {} at beta = {}", m.k, c.beta),
                ));
            }
            let branch = continue_branch(&m, Sign::Plus, c.beta, c.beta_step, &p, &d, &c.newton())?;
            let last = branch.points.last().ok_or(QptError::NoBranch {
                k: m.k,
                beta: c.beta,
                g: c.g,
            })?;
            Ok(last.solution.phi.clone())
        }
    }
}

pub fn evolve_cmd(c: &RunConfig) -> Result<(Report, Outcome), CliError> {
    let p = c.params()?;
    let d = c.domain()?;
    let settings = c.evolution()?;
    let phi = initial_state(c)?;
    let traj = evolve(&ComplexField::from_real(&phi), c.beta, &p, &d, &settings)?;
    let drift = conservation_report(&traj)?;
    let mut r = report("evolve", c, vec!["t", "N", "H", "sup_psi"]);
    r.result = vec![
        ("drift_N".into(), Cell::Float(drift.drift_n)),
        ("drift_N_relative".into(), Cell::Bool(drift.n_relative)),
        ("drift_H".into(), Cell::Float(drift.drift_h)),
        (
            "max_modulus_deviation".into(),
            Cell::Float(traj.max_modulus_deviation()),
        ),
    ];
    for i in 0..traj.times.len() {
        r.rows.push(vec![
            Cell::Float(traj.times[i]),
            Cell::Float(traj.particle_number[i]),
            Cell::Float(traj.energy[i]),
            Cell::Float(traj.sup_modulus[i]),
        ]);
    }
    Ok((r, Outcome::Success))
}
