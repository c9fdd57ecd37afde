mod common;

use std::f64::consts::PI;

use common::{disc_pair_energy, disc_pair_oracle, random_configuration};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vortex_core::equilibrium::*;
use vortex_core::hamiltonian::{flat_dot, flat_norm};
use vortex_core::{Configuration, Error, GreenBackend, HamiltonianModel, Point, Strengths};

fn model(b: GreenBackend, gamma: &[f64]) -> HamiltonianModel {
    HamiltonianModel::new(b, Strengths::new(gamma.to_vec()).unwrap())
}

fn disc_triple() -> HamiltonianModel {
    model(GreenBackend::disc(), &[1.0, -1.0, 1.0])
}

#[test]
fn field_is_the_gradient_far_from_the_barrier() {
    let m = disc_triple();
    let x = Configuration::new(vec![Point::new(0.3, 0.0), Point::new(0.0, 0.1), Point::new(-0.4, 0.2)]);
    let f = constrained_field_eval(&m, &x, 1e6, 0.05e6).unwrap();
    assert_eq!(f.field, m.grad_h(&x).unwrap());
    assert!(f.multiplier.is_none());
}

/// A configuration of `m` where `∇H` points out of `{Φ ≥ Φ(x)}`.
fn outward_point(m: &HamiltonianModel, seed: u64) -> Configuration {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let x = random_configuration(m.backend().domain(), m.len(), 0.02, 0.02, &mut rng);
        let e = m.evaluate(&x).unwrap();
        if e.phi < 0.0 && flat_dot(&e.grad_h, &e.grad_phi) < 0.0 {
            return x;
        }
    }
}

#[test]
fn field_is_tangential_on_the_barrier() {
    let m = disc_triple();
    for seed in 0..10 {
        let x = outward_point(&m, seed);
        let e = m.evaluate(&x).unwrap();
        let m0 = -e.phi;
        let f = blend_field(e.clone(), m0, 0.05 * m0).unwrap();
        assert_eq!(f.blend, 0.0);
        let normal = flat_dot(&f.field, &e.grad_phi) / flat_norm(&e.grad_phi);
        assert!(normal.abs() < 1e-12 * flat_norm(&e.grad_h).max(1.0), "{normal:e}");
        assert!(f.multiplier.unwrap() < 0.0);
    }
}

proptest! {
    #[test]
    fn banded_field_never_descends(seed in 0u64..500, s in 0.0..1.0f64) {
        let m = model(GreenBackend::annulus(0.5).unwrap(), &[1.0, -2.0, 1.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_configuration(m.backend().domain(), 3, 0.01, 0.01, &mut rng);
        let e = m.evaluate(&x).unwrap();
        prop_assume!(e.phi < -0.1);
        let band = 0.05 * -e.phi;
        let m0 = -e.phi + s * band;
        let f = blend_field(e.clone(), m0, band).unwrap();
        prop_assert!(flat_dot(&f.field, &e.grad_h) >= -1e-12 * flat_dot(&e.grad_h, &e.grad_h).max(1.0));
    }
}

#[test]
fn degenerate_barrier_is_reported() {
    let m = disc_triple();
    let x = outward_point(&m, 3);
    let mut e = m.evaluate(&x).unwrap();
    let m0 = -e.phi;
    e.grad_phi.iter_mut().for_each(|g| *g = Point::zeros());
    assert!(matches!(blend_field(e, m0, 1.0), Err(Error::DegenerateBoundary(_))));
}

#[test]
fn flow_ascends_and_finds_a_candidate() {
    let m = disc_triple();
    let cyc = LinkingCycle::new(m.backend().domain(), 3, 0.1, Point::zeros(), 128).unwrap();
    let cal = calibrate_region(&m, &cyc, 0).unwrap();
    assert!(cal.a < cal.cycle_min_h && cal.linking_sup_h < cal.b);
    let mut p = FlowParams::new(cal.m0, cal.a, cal.b);
    p.record_every = Some(1);
    let state = ascend_flow(&m, &cyc, &p).unwrap();
    assert!(state.candidates().any(|s| s.residual < 1e-3));
    assert!(!state.has_violation());
    for s in &state.ensemble {
        assert!(s.path.windows(2).all(|w| w[1].h >= w[0].h - 1e-9));
        assert!(s.min_margin >= -0.5 * state.band);
    }
    assert!(state.max_decrease() <= 1e-9);
}

#[test]
fn empty_energy_window_is_a_parameter_error() {
    let m = disc_triple();
    let cyc = LinkingCycle::new(m.backend().domain(), 3, 0.1, Point::zeros(), 64).unwrap();
    let p = FlowParams::new(10.0, -100.0, -50.0);
    assert!(matches!(ascend_flow(&m, &cyc, &p), Err(Error::Parameter(_))));
}

#[test]
fn calibration_refuses_failing_strengths() {
    let m = model(GreenBackend::disc(), &[2.0, -1.0, 2.0]);
    let cyc = LinkingCycle::new(m.backend().domain(), 3, 0.1, Point::zeros(), 64).unwrap();
    assert!(require_applicable(&m).is_err());
    assert!(calibrate_region(&m, &cyc, 0).is_err());
    assert!(find_equilibria(&m, &cyc, &SearchParams::default()).is_err());
}

#[test]
fn sup_on_the_linking_set_is_finite() {
    let (sup, arg) = sup_on_linking_set(&disc_triple(), 16, 1).unwrap();
    assert!(sup.is_finite());
    assert!(in_linking_set(&arg, 1e-9).unwrap());
}

#[test]
fn newton_matches_the_diameter_oracle() {
    let m = model(GreenBackend::disc(), &[1.0, -1.0]);
    let a = disc_pair_oracle();
    assert!((a * a - (5f64.sqrt() - 2.0)).abs() < 1e-14);
    let x0 = Configuration::new(vec![Point::new(0.45, 0.0), Point::new(-0.52, 0.0)]);
    let r = newton_refine(&m, &x0, 1e-10, 50).unwrap();
    assert!(r.residual < 1e-10);
    for (p, q) in r.x.points().iter().zip([Point::new(a, 0.0), Point::new(-a, 0.0)]) {
        assert!((p - q).norm() < 1e-8, "{p:?}");
    }
    let again = newton_refine(&m, &r.x, 1e-10, 50).unwrap();
    assert_eq!(again.iterations, 0);
    assert_eq!(again.x, r.x);
}

#[test]
fn n2_search_on_the_disc() {
    let m = model(GreenBackend::disc(), &[1.0, -1.0]);
    let s = find_equilibrium_n2(&m, &N2Params::default()).unwrap();
    let a = disc_pair_oracle();
    assert!((s.best.value - disc_pair_energy(a)).abs() < 1e-10);
    assert!(s.best.residual < 1e-10);
    let p = s.best.x.points();
    assert!((p[0] + p[1]).norm() < 1e-8);
    assert!((p[0].norm() - a).abs() < 1e-8);
}

#[test]
fn n2_search_for_an_asymmetric_pair() {
    let m = model(GreenBackend::disc(), &[1.0, -2.0]);
    let s = find_equilibrium_n2(&m, &N2Params::default()).unwrap();
    assert!(s.best.residual < 1e-10);
    assert!(s.converged.len() >= 10);
    for r in &s.converged {
        assert!((r.value - s.best.value).abs() < 1e-8 * (1.0 + s.best.value.abs()));
    }
    // a maximizer has no positive Hessian direction
    assert!(s.best.hessian_eigs.iter().all(|e| *e < 1e-6));
}

#[test]
fn n2_search_on_the_annulus() {
    let m = model(GreenBackend::annulus(0.5).unwrap(), &[1.0, -1.0]);
    let s = find_equilibrium_n2(&m, &N2Params::default()).unwrap();
    assert!(s.best.residual < 1e-8);
    assert!(s.best.x.validate(m.backend()).is_ok());
}

fn check_run(m: &HamiltonianModel, cyc: &LinkingCycle) -> EquilibriumRun {
    let run = find_equilibria(m, cyc, &SearchParams::default()).unwrap();
    for r in &run.results {
        assert!(r.residual < 1e-10, "residual {:e}", r.residual);
        assert!(r.phi_margin.unwrap() > 0.0);
    }
    run
}

#[test]
fn three_vortices_on_the_disc_and_annulus() {
    let m = disc_triple();
    check_run(&m, &LinkingCycle::new(m.backend().domain(), 3, 0.1, Point::zeros(), 128).unwrap());
    let m = model(GreenBackend::annulus(0.5).unwrap(), &[1.0, -1.0, 1.0]);
    let cyc = LinkingCycle::new(m.backend().domain(), 3, 0.1, Point::new(0.75, 0.0), 128).unwrap();
    check_run(&m, &cyc);
}

#[test]
fn rotated_equilibria_share_an_orbit() {
    let m = disc_triple();
    let run = check_run(&m, &LinkingCycle::new(m.backend().domain(), 3, 0.1, Point::zeros(), 64).unwrap());
    let r = &run.results[0];
    let dom = m.backend().domain();
    for t in [0.3, 1.0, PI] {
        let rx = r.x.rotated(t);
        assert!(orbit_distance(dom, &r.x, &rx) < 1e-12);
        let refined = newton_refine(&m, &rx, 1e-10, 50).unwrap();
        assert!((refined.value - r.value).abs() < 1e-10);
        assert_eq!(cluster(dom, vec![r.clone(), refined]).len(), 1);
    }
}

#[test]
fn linking_witness_on_a_perturbed_cycle() {
    let cyc = LinkingCycle::new(&vortex_core::Domain::unit_disc(), 3, 0.1, Point::zeros(), 64).unwrap();
    let curve = |z: f64| {
        let x = cyc.at(&[z]).unwrap();
        let bump = 0.02 * Point::new((3.0 * z).sin(), (2.0 * z).cos());
        Configuration::new(x.points().iter().map(|p| p + bump).collect())
    };
    let w = linking_witness(curve, 1e-9, 64, 4096).unwrap();
    assert!(in_linking_set(&w.x, 1e-9).unwrap());
}
