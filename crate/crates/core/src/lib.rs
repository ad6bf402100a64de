//! Numerical toolkit for the quantum-phase-transition structure of the scalar
//! Bose-Einstein condensate on an interval with Dirichlet walls.
//!
//! The stationary Gross-Pitaevskii equation
//! `-kappa phi'' + (beta - hbar lambda) phi + g phi^3 = 0`, `phi(0) = phi(L) = 0`,
//! loses stability of the trivial state at the critical points
//! `beta_k = hbar lambda - kappa xi_k`, where a pair of nontrivial states
//! branches off. The modules compute the critical points, the leading-order
//! reduced theory, Newton-corrected solutions and full branches, state
//! counts, and time evolution with conservation audits.

pub mod continuation;
pub mod dynamics;
pub mod error;
pub mod model;
pub mod reduced;
pub mod solver;
pub mod spectral;
pub mod tridiag;

pub use continuation::{
    bifurcation_diagram, branch_separation, continue_branch, nodal_count, state_census, Branch,
    BranchPoint, CensusReport, Diagram, DiagramRow,
};
pub use dynamics::{
    conservation_report, crank_nicolson_step, evolve, hamilton_split_step, ComplexField,
    ConservationReport, EvolutionSettings, Scheme, Trajectory,
};
pub use error::{QptError, Result};
pub use model::{
    hamiltonian_energy, l2_distance, l2_inner, particle_number, BetaParam, Domain, GridFunction,
    PhysicalParams,
};
pub use reduced::{
    asymptotic_solution, branch_exists, critical_beta, gamma, reduced_roots, CriticalPoint,
    ReducedCubic, Sign,
};
pub use solver::{deflated_search, jacobian, newton_solve, residual, NewtonSettings, Solution};
pub use spectral::{analytic_modes, numeric_modes, Mode};
