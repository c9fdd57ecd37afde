//! Dirichlet Green function of the annulus `ρ < |z| < 1` as a product of
//! images (the annulus prime function), truncated after `K` image pairs.
//!
//! With `q = ρ²` and `P(ζ) = (1-ζ) Π_k (1 - q^k ζ)(1 - q^k/ζ)` one has
//!
//! ```text
//! G(z,w) = -(1/2π) ln( |w| |P(z/w)| / |P(z w̄)| ) + ln|z| ln|w| / (2π ln ρ)
//! ```
//!
//! which vanishes on both circles. The `(1 - z/w)` factor carries the
//! logarithmic singularity; everything else is the regular part.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{GreenEval, RobinEval};
use crate::Point;

/// Target bound on the truncated tail of the image series.
const TAIL_BOUND: f64 = 1e-13;

#[derive(Debug, Clone)]
pub struct AnnulusGreen {
    rho: f64,
    ln_rho: f64,
    /// `q^k` for `k = 1..=K`.
    powers: Vec<f64>,
}

impl AnnulusGreen {
    pub fn new(inner_radius: f64) -> Self {
        Self::with_truncation(inner_radius, Self::truncation_for(inner_radius))
    }

    pub fn with_truncation(inner_radius: f64, k: usize) -> Self {
        let q = inner_radius * inner_radius;
        let powers = (1..=k as i32).map(|j| q.powi(j)).collect();
        Self {
            rho: inner_radius,
            ln_rho: inner_radius.ln(),
            powers,
        }
    }

    /// Smallest `K ≥ 2` whose tail bound `(2/π) ρ^{2K} / (1-ρ²)²` is below 1e-13.
    pub fn truncation_for(inner_radius: f64) -> usize {
        let q = inner_radius * inner_radius;
        let mut k = 2;
        while 2.0 / PI * q.powi(k as i32) / ((1.0 - q) * (1.0 - q)) >= TAIL_BOUND {
            k += 1;
        }
        k
    }

    pub fn truncation(&self) -> usize {
        self.powers.len()
    }

    pub fn inner_radius(&self) -> f64 {
        self.rho
    }

    pub(crate) fn regular(&self, x: Point, y: Point) -> f64 {
        let (z, w) = (c(x), c(y));
        let zw = z * w.conj();
        let mut sing = 0.0; // images of P(z/w) beyond the leading factor
        let mut refl = (1.0 - zw).norm().ln(); // P(z w̄)
        for &qk in &self.powers {
            sing += (1.0 - qk * z / w).norm().ln() + (1.0 - qk * w / z).norm().ln();
            refl += (1.0 - qk * zw).norm().ln() + (1.0 - qk / zw).norm().ln();
        }
        (refl - sing) / (2.0 * PI) + z.norm().ln() * w.norm().ln() / (2.0 * PI * self.ln_rho)
    }

    /// ∇_z of the regular part.
    fn regular_grad_first(&self, x: Point, y: Point) -> Point {
        let (z, w) = (c(x), c(y));
        let wb = w.conj();
        let zw = z * wb;
        // f'/f for each ln|f| term; the gradient of ln|f| is conj(f'/f)
        let mut sing = Complex64::new(0.0, 0.0);
        let mut refl = -wb / (1.0 - zw);
        for &qk in &self.powers {
            sing += -qk / (w - qk * z) + qk * w / (z * (z - qk * w));
            refl += -qk * wb / (1.0 - qk * zw) + qk / (z * (zw - qk));
        }
        let d = (refl - sing).conj() / (2.0 * PI);
        let radial = x / x.norm_squared() * (y.norm().ln() / (2.0 * PI * self.ln_rho));
        Point::new(d.re, d.im) + radial
    }

    pub(crate) fn regular_with_grads(&self, x: Point, y: Point) -> (f64, Point, Point) {
        (
            self.regular(x, y),
            self.regular_grad_first(x, y),
            self.regular_grad_first(y, x),
        )
    }

    pub(crate) fn green(&self, x: Point, y: Point) -> GreenEval {
        let r = x - y;
        let r2 = r.norm_squared();
        let (g, gx, gy) = self.regular_with_grads(x, y);
        GreenEval {
            value: g - r2.ln() / (4.0 * PI),
            grad_x: gx - r / (2.0 * PI * r2),
            grad_y: gy + r / (2.0 * PI * r2),
        }
    }

    pub(crate) fn robin(&self, x: Point) -> RobinEval {
        RobinEval {
            value: self.regular(x, x),
            grad: 2.0 * self.regular_grad_first(x, x),
        }
    }
}

fn c(p: Point) -> Complex64 {
    Complex64::new(p.x, p.y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncation_for_half_radius() {
        assert_eq!(AnnulusGreen::truncation_for(0.5), 22);
        assert!(AnnulusGreen::truncation_for(0.9) > AnnulusGreen::truncation_for(0.5));
    }

    #[test]
    fn vanishes_on_both_circles() {
        let a = AnnulusGreen::new(0.5);
        let w = Point::new(0.3, -0.55);
        for k in 0..16 {
            let t = k as f64 * 0.39;
            let dir = Point::new(t.cos(), t.sin());
            for radius in [1.0, 0.5] {
                let g = a.green(radius * dir, w).value;
                assert!(g.abs() < 1e-13, "G = {g} at radius {radius}");
            }
        }
    }

    #[test]
    fn small_hole_approaches_the_disc() {
        // apart from the capacity term the images beyond the first vanish
        let rho: f64 = 1e-6;
        let a = AnnulusGreen::new(rho);
        let d = super::super::disc::DiscGreen;
        let (x, y) = (Point::new(0.3, 0.4), Point::new(-0.5, 0.1));
        let cap = x.norm().ln() * y.norm().ln() / (2.0 * PI * rho.ln());
        assert!((a.regular(x, y) - cap - d.regular(x, y)).abs() < 1e-10);
    }
}
