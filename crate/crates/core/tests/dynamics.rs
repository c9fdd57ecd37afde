mod common;

use common::{disc_pair_oracle, random_configuration};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vortex_core::dynamics::{integrate, integrate_many, velocity, Scheme};
use vortex_core::{Configuration, GreenBackend, HamiltonianModel, Point, Strengths};

fn model(gamma: &[f64]) -> HamiltonianModel {
    HamiltonianModel::new(GreenBackend::disc(), Strengths::new(gamma.to_vec()).unwrap())
}

fn pts(v: &[(f64, f64)]) -> Configuration {
    Configuration::new(v.iter().map(|p| Point::new(p.0, p.1)).collect())
}

fn impulse(gamma: &[f64], x: &Configuration) -> f64 {
    gamma.iter().zip(x.points()).map(|(g, p)| g * p.norm_squared()).sum()
}

#[test]
fn single_vortex_circles_at_constant_radius() {
    let m = model(&[1.0]);
    let tr = integrate(&m, &pts(&[(0.5, 0.0)]), 1e-3, 10.0, Scheme::ImplicitMidpoint, 100).unwrap();
    assert!(tr.halted.is_none());
    let worst = tr.points.iter().map(|p| (p.x.points()[0].norm() - 0.5).abs()).fold(0.0, f64::max);
    assert!(worst < 1e-8, "{worst:e}");
    // the orbit has actually moved
    assert!((tr.last().x.points()[0] - Point::new(0.5, 0.0)).norm() > 0.1);
}

#[test]
fn off_equilibrium_pair_conserves_energy() {
    let m = model(&[1.0, -1.0]);
    let tr = integrate(&m, &pts(&[(0.35, 0.0), (-0.35, 0.0)]), 1e-3, 100.0, Scheme::ImplicitMidpoint, 1000).unwrap();
    assert!(tr.halted.is_none());
    assert_eq!(tr.points.len(), 101);
    assert!(tr.max_relative_drift() < 1e-8, "{:e}", tr.max_relative_drift());
}

#[test]
fn disc_angular_impulse_is_conserved() {
    let gamma = [1.0, -2.0, 0.7];
    let m = model(&gamma);
    let x0 = pts(&[(0.3, 0.1), (-0.2, -0.3), (0.1, 0.5)]);
    let tr = integrate(&m, &x0, 1e-3, 5.0, Scheme::ImplicitMidpoint, 50).unwrap();
    assert!(tr.halted.is_none());
    let i0 = impulse(&gamma, &x0);
    let worst = tr.points.iter().map(|p| (impulse(&gamma, &p.x) - i0).abs()).fold(0.0, f64::max);
    assert!(worst < 1e-8, "{worst:e}");
}

#[test]
fn midpoint_runs_backwards_to_the_start() {
    let m = model(&[1.0, -1.0, 1.0]);
    let x0 = pts(&[(0.3, 0.1), (-0.2, -0.3), (0.1, 0.5)]);
    let fwd = integrate(&m, &x0, 1e-3, 2.0, Scheme::ImplicitMidpoint, 1000).unwrap();
    let mut x = fwd.last().x.clone();
    for _ in 0..2000 {
        x = vortex_core::dynamics::step(&m, &x, -1e-3, Scheme::ImplicitMidpoint).unwrap();
    }
    let err = x.points().iter().zip(x0.points()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    assert!(err < 1e-7, "{err:e}");
}

#[test]
fn equilibrium_is_a_fixed_point() {
    let m = model(&[1.0, -1.0]);
    let a = disc_pair_oracle();
    let x0 = pts(&[(a, 0.0), (-a, 0.0)]);
    let v = velocity(&m, &x0).unwrap();
    assert!(v.iter().all(|v| v.norm() < 1e-12));
    let tr = integrate(&m, &x0, 1e-3, 10.0, Scheme::ImplicitMidpoint, 1000).unwrap();
    let drift = tr
        .points
        .iter()
        .flat_map(|p| p.x.points().iter().zip(x0.points()).map(|(a, b)| (a - b).norm()))
        .fold(0.0, f64::max);
    assert!(drift < 1e-6, "{drift:e}");
}

#[test]
fn rk4_drift_is_reported() {
    let m = model(&[1.0, -1.0]);
    let tr = integrate(&m, &pts(&[(0.35, 0.0), (-0.35, 0.0)]), 1e-2, 5.0, Scheme::Rk4, 10).unwrap();
    assert!(tr.max_relative_drift().is_finite());
}

#[test]
fn ensembles_keep_their_order() {
    let m = model(&[1.0]);
    let starts: Vec<_> = [0.2, 0.4, 0.6].iter().map(|r| pts(&[(*r, 0.0)])).collect();
    let out = integrate_many(&m, &starts, 1e-2, 1.0, Scheme::ImplicitMidpoint, 10);
    for (tr, r) in out.iter().zip([0.2, 0.4, 0.6]) {
        let tr = tr.as_ref().unwrap();
        assert!((tr.last().x.points()[0].norm() - r).abs() < 1e-9);
    }
}

proptest! {
    #[test]
    fn velocity_is_a_rotated_gradient(seed in 0u64..1000) {
        let gamma = [1.0, -1.5, 0.4];
        let m = model(&gamma);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_configuration(m.backend().domain(), 3, 0.05, 0.05, &mut rng);
        let v = velocity(&m, &x).unwrap();
        let g = m.grad_h(&x).unwrap();
        let dot: f64 = v.iter().zip(&g).zip(&gamma).map(|((v, g), c)| c * v.dot(g)).sum();
        prop_assert!(dot.abs() <= 1e-12 * g.iter().map(|g| g.norm_squared()).sum::<f64>().max(1.0));
        for ((v, g), c) in v.iter().zip(&g).zip(&gamma) {
            prop_assert!((*c * v - Point::new(g.y, -g.x)).norm() < 1e-12 * g.norm().max(1.0));
        }
    }
}
