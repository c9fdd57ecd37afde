//! Boundary-integral Green function for simply connected domains.
//!
//! The boundary samples are interpolated by a trigonometric curve `γ(t)`.
//! For a source `y` the regular part `g(·, y)` is the harmonic function with
//! boundary data `(1/2π) ln|s − y|`, represented as a double-layer potential
//! whose density solves the second-kind equation `μ/2 + Kμ = φ`. The
//! equation is discretized by the trapezoidal rule at `panelCount` nodes
//! (node = collocation point) and solved once by dense LU. Off-surface
//! evaluation uses `quadratureOrder` times as many nodes, with the density
//! carried over by trigonometric interpolation.
//!
//! Boundary samples of a non-smooth polygon make the interpolant ring; such
//! inputs are accepted but only smooth references are trustworthy.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, LU};
use num_complex::Complex64;

use crate::domain::{Domain, Shape};
use crate::error::{Error, Result};
use crate::Point;

/// Complex trigonometric interpolant of closed-curve samples.
#[derive(Debug, Clone)]
struct TrigCurve {
    /// `(k, c_k)` pairs; the Nyquist mode is split symmetrically.
    modes: Vec<(f64, Complex64)>,
}

struct CurvePoint {
    pos: Point,
    d1: Point,
    d2: Point,
}

impl TrigCurve {
    fn interpolate(samples: &[Point]) -> Self {
        let m = samples.len();
        let half = m as i64 / 2;
        let even = m.is_multiple_of(2);
        let mut modes = Vec::with_capacity(m + 1);
        for k in -half..=half {
            let mut c = Complex64::new(0.0, 0.0);
            for (j, p) in samples.iter().enumerate() {
                let t = 2.0 * PI * j as f64 / m as f64;
                c += Complex64::new(p.x, p.y) * Complex64::from_polar(1.0, -(k as f64) * t);
            }
            c /= m as f64;
            if even && k.abs() == half {
                c *= 0.5;
            }
            modes.push((k as f64, c));
        }
        Self { modes }
    }

    fn eval(&self, t: f64) -> CurvePoint {
        let (mut z, mut z1, mut z2) = (Complex64::default(), Complex64::default(), Complex64::default());
        for &(k, c) in &self.modes {
            let e = c * Complex64::from_polar(1.0, k * t);
            z += e;
            z1 += e * Complex64::new(0.0, k);
            z2 -= e * (k * k);
        }
        CurvePoint {
            pos: Point::new(z.re, z.im),
            d1: Point::new(z1.re, z1.im),
            d2: Point::new(z2.re, z2.im),
        }
    }
}

/// Quadrature node: position and outward normal scaled by the weight.
#[derive(Debug, Clone, Copy)]
struct Node {
    pos: Point,
    nw: Point,
}

#[derive(Debug, Clone)]
pub struct BemGreen {
    panel_count: usize,
    quadrature_order: usize,
    curve: TrigCurve,
    coarse: Vec<Node>,
    fine: Vec<Node>,
    /// Density interpolation, fine × coarse; absent when the grids coincide.
    interp: Option<DMatrix<f64>>,
    lu: LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl BemGreen {
    pub fn new(domain: &Domain, panel_count: usize, quadrature_order: usize) -> Result<Self> {
        if panel_count < 8 {
            return Err(Error::Parameter(format!("panel count {panel_count} is below 8")));
        }
        if quadrature_order == 0 {
            return Err(Error::Parameter("quadrature order must be positive".into()));
        }
        let samples = match domain.shape() {
            Shape::Annulus { .. } => {
                return Err(Error::Unsupported(
                    "the boundary-integral backend handles simply connected domains only".into(),
                ))
            }
            _ => domain.boundary_samples(panel_count)?,
        };
        let curve = TrigCurve::interpolate(&samples);
        let n = panel_count;
        let coarse_pts: Vec<(CurvePoint, f64)> = (0..n)
            .map(|j| (curve.eval(2.0 * PI * j as f64 / n as f64), 2.0 * PI / n as f64))
            .collect();
        let coarse: Vec<Node> = coarse_pts.iter().map(|(c, w)| node(c, *w)).collect();

        let mut a = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                a[(i, j)] = if i == j {
                    let c = &coarse_pts[i].0;
                    let speed = c.d1.norm();
                    let kappa = (c.d1.x * c.d2.y - c.d1.y * c.d2.x) / speed.powi(3);
                    0.5 + kappa / (4.0 * PI) * coarse_pts[i].1 * speed
                } else {
                    kernel(coarse[i].pos, &coarse[j])
                };
            }
        }
        let lu = a.lu();
        if !lu.is_invertible() {
            return Err(Error::LinearSolver("boundary-integral matrix is singular".into()));
        }

        let (fine, interp) = if quadrature_order == 1 {
            (coarse.clone(), None)
        } else {
            let nf = n * quadrature_order;
            let h = 2.0 * PI / nf as f64;
            let fine: Vec<Node> = (0..nf).map(|f| node(&curve.eval(f as f64 * h), h)).collect();
            let interp = DMatrix::from_fn(nf, n, |f, j| {
                dirichlet(f as f64 * h - 2.0 * PI * j as f64 / n as f64, n)
            });
            (fine, Some(interp))
        };
        Ok(Self {
            panel_count,
            quadrature_order,
            curve,
            coarse,
            fine,
            interp,
            lu,
        })
    }

    pub fn panel_count(&self) -> usize {
        self.panel_count
    }

    pub fn quadrature_order(&self) -> usize {
        self.quadrature_order
    }

    /// Mean arc-length spacing of the collocation nodes.
    pub fn node_spacing(&self) -> f64 {
        self.coarse.iter().map(|s| s.nw.norm()).sum::<f64>() / self.coarse.len() as f64
    }

    /// Densities for the data `φ`, `∂φ/∂y₁`, `∂φ/∂y₂` of a source `y`.
    fn densities(&self, y: Point) -> DMatrix<f64> {
        let n = self.coarse.len();
        let mut rhs = DMatrix::<f64>::zeros(n, 3);
        for (i, s) in self.coarse.iter().enumerate() {
            let r = s.pos - y;
            let r2 = r.norm_squared();
            rhs[(i, 0)] = r2.ln() / (4.0 * PI);
            rhs[(i, 1)] = -r.x / (2.0 * PI * r2);
            rhs[(i, 2)] = -r.y / (2.0 * PI * r2);
        }
        self.lu.solve(&rhs).expect("factorization checked at construction")
    }

    /// Layer weights at `x` pulled back to the coarse nodes: value, ∂x₁, ∂x₂.
    fn weights(&self, x: Point) -> [DVector<f64>; 3] {
        let nf = self.fine.len();
        let mut w = [DVector::zeros(nf), DVector::zeros(nf), DVector::zeros(nf)];
        for (f, s) in self.fine.iter().enumerate() {
            let r = s.pos - x;
            let r2 = r.norm_squared();
            let rn = r.dot(&s.nw);
            w[0][f] = rn / (2.0 * PI * r2);
            let g = (-s.nw / r2 + 2.0 * rn * r / (r2 * r2)) / (2.0 * PI);
            w[1][f] = g.x;
            w[2][f] = g.y;
        }
        match &self.interp {
            None => w,
            Some(t) => w.map(|v| t.tr_mul(&v)),
        }
    }

    /// Regular part, gradient in `x`, gradient in `y`.
    pub(crate) fn regular_with_grads(&self, x: Point, y: Point) -> (f64, Point, Point) {
        let mu = self.densities(y);
        let [w0, w1, w2] = self.weights(x);
        let m0 = mu.column(0);
        (
            w0.dot(&m0),
            Point::new(w1.dot(&m0), w2.dot(&m0)),
            Point::new(w0.dot(&mu.column(1)), w0.dot(&mu.column(2))),
        )
    }

    pub(crate) fn regular(&self, x: Point, y: Point) -> f64 {
        let mu = self.densities(y);
        let [w0, _, _] = self.weights(x);
        w0.dot(&mu.column(0))
    }

    /// Largest mismatch between the boundary trace of `g(·, y)` and the log
    /// kernel, sampled at the midpoints between nodes.
    pub fn boundary_residual(&self, y: Point) -> f64 {
        let n = self.coarse.len();
        let mu = self.densities(y);
        let mut worst = 0.0f64;
        for j in 0..n {
            let t = 2.0 * PI * (j as f64 + 0.5) / n as f64;
            let p = self.curve.eval(t).pos;
            let mut trace = 0.0;
            for (i, s) in self.coarse.iter().enumerate() {
                trace += kernel(p, s) * mu[(i, 0)];
                trace += 0.5 * mu[(i, 0)] * dirichlet(t - 2.0 * PI * i as f64 / n as f64, n);
            }
            let target = (p - y).norm().ln() / (2.0 * PI);
            worst = worst.max((trace - target).abs());
        }
        worst
    }
}

fn node(c: &CurvePoint, weight: f64) -> Node {
    let speed = c.d1.norm();
    let outward = Point::new(c.d1.y, -c.d1.x) / speed;
    Node {
        pos: c.pos,
        nw: outward * (weight * speed),
    }
}

/// Weighted double-layer kernel `w (s − x)·n / (2π |s − x|²)`.
fn kernel(x: Point, s: &Node) -> f64 {
    let r = s.pos - x;
    r.dot(&s.nw) / (2.0 * PI * r.norm_squared())
}

/// Periodic cardinal function of the `n`-point trigonometric interpolant.
fn dirichlet(tau: f64, n: usize) -> f64 {
    let half = 0.5 * tau;
    let s = half.sin();
    if s.abs() < 1e-14 {
        // τ is a multiple of 2π
        return 1.0;
    }
    let nf = n as f64;
    if n.is_multiple_of(2) {
        (nf * half).sin() * half.cos() / (s * nf)
    } else {
        (nf * half).sin() / (s * nf)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cardinal_function_is_a_delta_on_nodes() {
        for n in [8usize, 9] {
            for j in 0..n {
                let tau = 2.0 * PI * j as f64 / n as f64;
                let expect = if j == 0 { 1.0 } else { 0.0 };
                assert!((dirichlet(tau, n) - expect).abs() < 1e-12);
                assert!((dirichlet(tau + 2.0 * PI, n) - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn interpolant_reproduces_an_ellipse() {
        let pts: Vec<Point> = (0..32)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / 32.0;
                Point::new(1.5 * t.cos(), 0.7 * t.sin())
            })
            .collect();
        let c = TrigCurve::interpolate(&pts);
        let p = c.eval(0.3);
        assert!((p.pos - Point::new(1.5 * 0.3f64.cos(), 0.7 * 0.3f64.sin())).norm() < 1e-13);
        assert!((p.d2 + p.pos).norm() < 1e-12);
    }

    #[test]
    fn trace_matches_data_on_the_disc() {
        let b = BemGreen::new(&Domain::unit_disc(), 64, 1).unwrap();
        assert!(b.boundary_residual(Point::new(0.2, -0.3)) < 1e-10);
    }
}
