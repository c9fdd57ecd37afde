//! Grouping of equilibria that agree up to the symmetries of the domain.

use num_complex::Complex64;

use super::newton::EquilibriumResult;
use crate::domain::Domain;
use crate::hamiltonian::Configuration;

fn complex(x: &Configuration) -> Vec<Complex64> {
    x.points().iter().map(|p| Complex64::new(p.x, p.y)).collect()
}

fn best_rotation(z: &[Complex64], w: &[Complex64]) -> f64 {
    let s: Complex64 = z.iter().zip(w).map(|(a, b)| b * a.conj()).sum();
    let theta = if s.norm() > 0.0 { s.arg() } else { 0.0 };
    let r = Complex64::from_polar(1.0, theta);
    z.iter().zip(w).map(|(a, b)| (r * a - b).norm_sqr()).sum::<f64>().sqrt()
}

/// Distance between `x` and the closest image of `y` under the isometries
/// of `domain` fixing it: all of O(2) for the disc and the annulus, the
/// identity otherwise.
pub fn orbit_distance(domain: &Domain, x: &Configuration, y: &Configuration) -> f64 {
    let (z, w) = (complex(x), complex(y));
    if !domain.is_rotation_invariant() {
        return z.iter().zip(&w).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
    }
    let mirrored: Vec<Complex64> = z.iter().map(|a| a.conj()).collect();
    best_rotation(&z, &w).min(best_rotation(&mirrored, &w))
}

/// Keeps one representative (the smallest residual) per cluster; clusters
/// share `H` to `1e−6 (1 + |H|)` and lie within orbit distance `1e−6`.
pub fn cluster(domain: &Domain, results: Vec<EquilibriumResult>) -> Vec<EquilibriumResult> {
    let mut reps: Vec<EquilibriumResult> = Vec::new();
    for r in results {
        let same = reps.iter_mut().find(|q| {
            (q.value - r.value).abs() < 1e-6 * (1.0 + r.value.abs())
                && orbit_distance(domain, &q.x, &r.x) < 1e-6
        });
        match same {
            Some(q) if r.residual < q.residual => *q = r,
            Some(_) => {}
            None => reps.push(r),
        }
    }
    reps
}
