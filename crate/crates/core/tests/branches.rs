//! Branch-level properties of the continued solution families.

use qpt_core::continuation::{branch_separation, continue_branch, Branch};
use qpt_core::reduced::{critical_beta, gamma, Sign};
use qpt_core::solver::{residual, NewtonSettings};
use qpt_core::spectral::{numeric_modes, Mode};
use qpt_core::{l2_inner, Domain, PhysicalParams};

fn setup() -> (Vec<Mode>, PhysicalParams, Domain) {
    let d = Domain::standard();
    (numeric_modes(&d, 3).unwrap(), PhysicalParams::standard(), d)
}

fn branches(modes: &[Mode], p: &PhysicalParams, d: &Domain, beta_end: f64) -> Vec<Branch> {
    let s = NewtonSettings::default();
    modes
        .iter()
        .flat_map(|m| {
            Sign::BOTH.map(|sign| continue_branch(m, sign, beta_end, 0.05, p, d, &s).unwrap())
        })
        .collect()
}

#[test]
fn leading_order_consistency_near_onset() {
    let (modes, p, d) = setup();
    for m in &modes {
        let b = continue_branch(
            m,
            Sign::Plus,
            critical_beta(m, &p).beta_k - 0.5,
            0.01,
            &p,
            &d,
            &NewtonSettings::default(),
        )
        .unwrap();
        for pt in &b.points[..3] {
            let gk = gamma(m, pt.beta, &p);
            let mismatch = pt.amplitude * pt.amplitude * p.g() * m.alpha + gk;
            assert!(
                (mismatch / gk).abs() <= 0.1,
                "k={} beta={} rel={}",
                m.k,
                pt.beta,
                mismatch / gk
            );
        }
    }
}

#[test]
fn nodal_count_constant_and_amplitude_monotone() {
    let (modes, p, d) = setup();
    for b in branches(&modes, &p, &d, -12.0) {
        assert!(
            b.points.iter().all(|pt| pt.nodal_count == b.k - 1),
            "k={}",
            b.k
        );
        for w in b.points.windows(2) {
            assert!(w[1].beta < w[0].beta);
            assert!(
                w[1].amplitude.abs() >= w[0].amplitude.abs(),
                "k={} at beta={}",
                b.k,
                w[1].beta
            );
        }
        let first = &b.points[0];
        assert!(first.amplitude.abs() < 0.5);
        assert_eq!(first.amplitude.signum(), b.sign.factor());
    }
}

#[test]
fn distinct_branches_stay_apart() {
    let (modes, p, d) = setup();
    let all: Vec<Branch> = branches(&modes, &p, &d, -10.0)
        .iter()
        .map(|b| b.without_onset(0.01))
        .collect();
    for (i, a) in all.iter().enumerate() {
        for b in &all[i + 1..] {
            let sep = branch_separation(a, b, &d).unwrap();
            if sep.overlap {
                assert!(
                    sep.distance > 1e-3,
                    "({},{}) vs ({},{}): {}",
                    a.k,
                    a.sign,
                    b.k,
                    b.sign,
                    sep.distance
                );
            }
        }
    }
    let sep = branch_separation(&all[0], &all[2], &d).unwrap();
    assert!(sep.overlap && sep.distance > 0.1, "{}", sep.distance);
}

#[test]
fn branch_solutions_satisfy_stationarity_identity() {
    let (modes, p, d) = setup();
    for b in branches(&modes[..2], &p, &d, -6.0) {
        for pt in &b.points {
            let q = residual(&pt.solution.phi, pt.beta, &p, &d).unwrap();
            let inner = l2_inner(&q, &pt.solution.phi, &d).unwrap();
            assert!(inner.abs() <= 1e-8 * (1.0 + pt.particle_number));
            // Tolerance, or the roundoff floor of the stencil once |phi| grows.
            let floor =
                2.0 * f64::EPSILON * 4.0 * p.kappa() / (d.h() * d.h()) * pt.solution.phi.sup_norm();
            assert!(pt.solution.residual_norm <= 1e-10f64.max(floor) * 1.0001);
        }
    }
}

#[test]
fn amplitudes_stay_bounded_on_compact_intervals() {
    let (modes, p, d) = setup();
    let b = continue_branch(
        &modes[0],
        Sign::Plus,
        -20.0,
        0.1,
        &p,
        &d,
        &NewtonSettings::default(),
    )
    .unwrap();
    let sup = b
        .points
        .iter()
        .map(|pt| pt.solution.phi.sup_norm())
        .fold(0.0, f64::max);
    // The flat-top profile saturates near sqrt(-beta / g).
    assert!(sup.is_finite() && sup <= 20f64.sqrt() * 1.01, "sup {sup}");
}
