#![allow(dead_code)]

use std::f64::consts::PI;

use rand::Rng;
use vortex_core::{Configuration, Domain, GreenBackend, HamiltonianModel, Point};

pub fn ellipse_backend(n: usize, q: usize) -> GreenBackend {
    let pts: Vec<Point> = (0..n)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / n as f64;
            Point::new(1.3 * t.cos(), 0.8 * t.sin())
        })
        .collect();
    GreenBackend::bem(Domain::panels(pts).unwrap(), n, q).unwrap()
}

/// `n` interior points at least `margin` from the boundary and `sep` apart.
pub fn random_configuration<R: Rng>(domain: &Domain, n: usize, margin: f64, sep: f64, rng: &mut R) -> Configuration {
    loop {
        let pts: Vec<Point> = (0..n).map(|_| domain.sample_interior(rng, margin)).collect();
        let x = Configuration::new(pts);
        if n < 2 || x.min_separation() >= sep {
            return x;
        }
    }
}

fn perturbed(x: &Configuration, i: usize, k: usize, s: f64) -> Configuration {
    let mut p = x.points().to_vec();
    p[i][k] += s;
    Configuration::new(p)
}

/// Central differences of `f` with step `step` in every coordinate.
pub fn fd_gradient(x: &Configuration, step: f64, f: impl Fn(&Configuration) -> f64) -> Vec<Point> {
    (0..x.len())
        .map(|i| {
            let mut g = Point::zeros();
            for k in 0..2 {
                g[k] = (f(&perturbed(x, i, k, step)) - f(&perturbed(x, i, k, -step))) / (2.0 * step);
            }
            g
        })
        .collect()
}

pub fn relative_error(a: &[Point], b: &[Point]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(p, q)| (p - q).norm_squared()).sum::<f64>().sqrt();
    let scale: f64 = b.iter().map(|q| q.norm_squared()).sum::<f64>().sqrt();
    diff / scale.max(1.0)
}

/// Worst relative error of `∇H` and `∇Φ` against central differences.
pub fn gradient_oracle(m: &HamiltonianModel, x: &Configuration, step: f64) -> f64 {
    let e = m.evaluate(x).unwrap();
    let fh = fd_gradient(x, step, |y| m.eval_h(y).unwrap());
    let fp = fd_gradient(x, step, |y| m.eval_phi(y).unwrap().value);
    relative_error(&fh, &e.grad_h).max(relative_error(&fp, &e.grad_phi))
}

/// `H(a) = 2h((a,0)) − 2G((a,0),(−a,0))` for the disc pair Γ = (1, −1),
/// written out from the closed forms `h(x) = (1/2π) ln(1 − |x|²)` and
/// `G(x, y) = (1/2π) ln(|1 − x ȳ| / |x − y|)`.
pub fn disc_pair_energy(a: f64) -> f64 {
    let h = (1.0 - a * a).ln() / (2.0 * PI);
    let g = ((1.0 + a * a) / (2.0 * a)).ln() / (2.0 * PI);
    2.0 * h - 2.0 * g
}

/// Maximizer of [`disc_pair_energy`] by bisection on
/// `π dH/da = 1/a − 2a/(1−a²) − 2a/(1+a²)`.
pub fn disc_pair_oracle() -> f64 {
    let d = |a: f64| 1.0 / a - 2.0 * a / (1.0 - a * a) - 2.0 * a / (1.0 + a * a);
    let (mut lo, mut hi) = (0.05, 0.95);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if d(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
