//! The N-vortex Hamiltonian
//!
//! ```text
//! H(x) = Σ Γᵢ² h(xᵢ) + Σ_{i≠j} ΓᵢΓⱼ G(xᵢ, xⱼ) + 2 Σ Γᵢ ψ₀(xᵢ) + f(x)
//! ```
//!
//! and the barrier `Φ(x) = Σ Γᵢ² h(xᵢ) − Σ_{i≠j} |ΓᵢΓⱼ| G(xᵢ, xⱼ)`, which
//! tends to −∞ at collisions and at the boundary.

use std::fmt::Debug;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::green::{GreenBackend, GreenEval, RobinEval, SEPARATION_GUARD};
use crate::Point;

/// Highest supported degree of the harmonic flux polynomial.
pub const MAX_FLUX_DEGREE: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct Strengths(Vec<f64>);

impl Strengths {
    pub fn new(gamma: Vec<f64>) -> Result<Self> {
        if gamma.is_empty() {
            return Err(Error::Strengths("at least one vortex is required".into()));
        }
        if let Some((i, g)) = gamma.iter().enumerate().find(|(_, g)| **g == 0.0 || !g.is_finite()) {
            return Err(Error::Strengths(format!("strength {} is {g}", i + 1)));
        }
        Ok(Self(gamma))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }
}

/// N vortex positions.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    points: Vec<Point>,
}

impl Configuration {
    /// Positions without validation; evaluations check them.
    pub fn new(points: Vec<Point>) -> Self {
        Self { points }
    }

    /// Positions checked to be interior and pairwise separated.
    pub fn validated(points: Vec<Point>, backend: &GreenBackend) -> Result<Self> {
        let c = Self { points };
        c.validate(backend)?;
        Ok(c)
    }

    pub fn from_flat(v: &[f64]) -> Self {
        Self {
            points: v.chunks_exact(2).map(|c| Point::new(c[0], c[1])).collect(),
        }
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.points.iter().flat_map(|p| [p.x, p.y]).collect()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn min_separation(&self) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..self.points.len() {
            for j in i + 1..self.points.len() {
                best = best.min((self.points[i] - self.points[j]).norm());
            }
        }
        best
    }

    pub fn validate(&self, backend: &GreenBackend) -> Result<()> {
        for p in &self.points {
            if !backend.domain().contains(*p) {
                return Err(Error::OutsideDomain(*p));
            }
        }
        let sep = self.min_separation();
        if sep <= SEPARATION_GUARD {
            return Err(Error::Coincident(sep));
        }
        Ok(())
    }

    /// Rotation of every point about the origin.
    pub fn rotated(&self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self {
            points: self
                .points
                .iter()
                .map(|p| Point::new(c * p.x - s * p.y, s * p.x + c * p.y))
                .collect(),
        }
    }
}

/// `ψ₀(x) = Σₖ (reₖ Re zᵏ + imₖ Im zᵏ)`, harmonic by construction.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct HarmonicTerm {
    re: Vec<f64>,
    im: Vec<f64>,
}

impl HarmonicTerm {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn new(re: Vec<f64>, im: Vec<f64>) -> Result<Self> {
        if re.len() > MAX_FLUX_DEGREE + 1 || im.len() > MAX_FLUX_DEGREE + 1 {
            return Err(Error::Parameter(format!(
                "flux polynomial degree exceeds {MAX_FLUX_DEGREE}"
            )));
        }
        if re.iter().chain(&im).any(|c| !c.is_finite()) {
            return Err(Error::Parameter("flux coefficients must be finite".into()));
        }
        Ok(Self { re, im })
    }

    pub fn constant(c: f64) -> Self {
        Self {
            re: vec![c],
            im: vec![],
        }
    }

    /// `ψ₀(x) = a·x`.
    pub fn linear(a: Point) -> Self {
        Self {
            re: vec![0.0, a.x],
            im: vec![0.0, a.y],
        }
    }

    pub fn re(&self) -> &[f64] {
        &self.re
    }

    pub fn im(&self) -> &[f64] {
        &self.im
    }

    pub fn is_zero(&self) -> bool {
        self.re.iter().chain(&self.im).all(|c| *c == 0.0)
    }

    fn coeff(&self, k: usize) -> Complex64 {
        let a = self.re.get(k).copied().unwrap_or(0.0);
        let b = self.im.get(k).copied().unwrap_or(0.0);
        Complex64::new(a, -b)
    }

    fn degree(&self) -> usize {
        self.re.len().max(self.im.len())
    }

    pub fn value(&self, x: Point) -> f64 {
        let z = Complex64::new(x.x, x.y);
        let mut acc = Complex64::new(0.0, 0.0);
        for k in (0..self.degree()).rev() {
            acc = acc * z + self.coeff(k);
        }
        acc.re
    }

    pub fn grad(&self, x: Point) -> Point {
        let z = Complex64::new(x.x, x.y);
        let mut acc = Complex64::new(0.0, 0.0);
        for k in (1..self.degree()).rev() {
            acc = acc * z + self.coeff(k) * k as f64;
        }
        Point::new(acc.re, -acc.im)
    }

    /// Real coefficients `c[p][q]` of `x^p y^q`.
    pub fn monomial_coefficients(&self) -> [[f64; MAX_FLUX_DEGREE + 1]; MAX_FLUX_DEGREE + 1] {
        let mut out = [[0.0; MAX_FLUX_DEGREE + 1]; MAX_FLUX_DEGREE + 1];
        for k in 0..self.degree() {
            let c = self.coeff(k);
            // c (x + iy)^k = Σ_j C(k,j) x^{k−j} (iy)^j
            let mut binom = 1.0;
            for j in 0..=k {
                let ij = match j % 4 {
                    0 => Complex64::new(1.0, 0.0),
                    1 => Complex64::new(0.0, 1.0),
                    2 => Complex64::new(-1.0, 0.0),
                    _ => Complex64::new(0.0, -1.0),
                };
                out[k - j][j] += (c * ij).re * binom;
                binom = binom * (k - j) as f64 / (j + 1) as f64;
            }
        }
        out
    }

    /// Largest coefficient of the Laplacian of the monomial expansion.
    pub fn laplacian_defect(&self) -> f64 {
        let c = self.monomial_coefficients();
        let n = MAX_FLUX_DEGREE + 1;
        let mut worst = 0.0f64;
        for p in 0..n {
            for q in 0..n {
                let a = if p + 2 < n { ((p + 2) * (p + 1)) as f64 * c[p + 2][q] } else { 0.0 };
                let b = if q + 2 < n { ((q + 2) * (q + 1)) as f64 * c[p][q + 2] } else { 0.0 };
                worst = worst.max((a + b).abs());
            }
        }
        worst
    }
}

/// A C¹ perturbation `f` added to the Hamiltonian.
pub trait Perturbation: Debug + Send + Sync {
    fn value(&self, x: &[Point]) -> f64;
    fn grad(&self, x: &[Point]) -> Vec<Point>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhiEval {
    pub value: f64,
    pub grad: Vec<Point>,
}

/// `H`, `∇H`, `Φ`, `∇Φ` from one pass over the Green evaluations.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub h: f64,
    pub grad_h: Vec<Point>,
    pub phi: f64,
    pub grad_phi: Vec<Point>,
}

struct Pass {
    robin: Vec<RobinEval>,
    /// `(i, j, G(xᵢ, xⱼ))` for `i < j`.
    pairs: Vec<(usize, usize, GreenEval)>,
}

#[derive(Debug, Clone)]
pub struct HamiltonianModel {
    backend: GreenBackend,
    strengths: Strengths,
    flux: HarmonicTerm,
    extra: Option<Arc<dyn Perturbation>>,
}

impl HamiltonianModel {
    pub fn new(backend: GreenBackend, strengths: Strengths) -> Self {
        Self {
            backend,
            strengths,
            flux: HarmonicTerm::zero(),
            extra: None,
        }
    }

    pub fn with_flux(mut self, flux: HarmonicTerm) -> Self {
        self.flux = flux;
        self
    }

    pub fn with_extra(mut self, extra: Arc<dyn Perturbation>) -> Self {
        self.extra = Some(extra);
        self
    }

    pub fn backend(&self) -> &GreenBackend {
        &self.backend
    }

    pub fn strengths(&self) -> &Strengths {
        &self.strengths
    }

    pub fn gamma(&self) -> &[f64] {
        self.strengths.as_slice()
    }

    pub fn flux(&self) -> &HarmonicTerm {
        &self.flux
    }

    pub fn extra(&self) -> Option<&Arc<dyn Perturbation>> {
        self.extra.as_ref()
    }

    pub fn len(&self) -> usize {
        self.strengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strengths.is_empty()
    }

    fn pass(&self, x: &Configuration) -> Result<Pass> {
        if x.len() != self.len() {
            return Err(Error::Arity(format!(
                "configuration has {} points, model has {} strengths",
                x.len(),
                self.len()
            )));
        }
        x.validate(&self.backend)?;
        let p = x.points();
        let robin = p
            .iter()
            .map(|&xi| self.backend.eval_robin(xi))
            .collect::<Result<Vec<_>>>()?;
        let mut pairs = Vec::with_capacity(p.len() * p.len().saturating_sub(1) / 2);
        for i in 0..p.len() {
            for j in i + 1..p.len() {
                pairs.push((i, j, self.backend.eval_g(p[i], p[j])?));
            }
        }
        Ok(Pass { robin, pairs })
    }

    /// Self and interaction terms with weights `wᵢⱼ` per ordered pair.
    fn combine(&self, pass: &Pass, weight: impl Fn(f64, f64) -> f64) -> (f64, Vec<Point>) {
        let gamma = self.gamma();
        let mut value = 0.0;
        let mut grad = vec![Point::zeros(); gamma.len()];
        for (i, r) in pass.robin.iter().enumerate() {
            let g2 = gamma[i] * gamma[i];
            value += g2 * r.value;
            grad[i] += g2 * r.grad;
        }
        for &(i, j, ref g) in &pass.pairs {
            // the ordered sum counts each unordered pair twice
            let w = 2.0 * weight(gamma[i], gamma[j]);
            value += w * g.value;
            grad[i] += w * g.grad_x;
            grad[j] += w * g.grad_y;
        }
        (value, grad)
    }

    fn add_flux(&self, x: &Configuration, value: &mut f64, grad: &mut [Point]) {
        if self.flux.is_zero() {
            return;
        }
        for (i, (&p, &g)) in x.points().iter().zip(self.gamma()).enumerate() {
            *value += 2.0 * g * self.flux.value(p);
            grad[i] += 2.0 * g * self.flux.grad(p);
        }
    }

    fn add_extra(&self, x: &Configuration, value: &mut f64, grad: &mut [Point]) {
        if let Some(f) = &self.extra {
            *value += f.value(x.points());
            for (g, d) in grad.iter_mut().zip(f.grad(x.points())) {
                *g += d;
            }
        }
    }

    /// Kirchhoff-Routh path function: `H` without the extra perturbation.
    pub fn eval_kr_grad(&self, x: &Configuration) -> Result<(f64, Vec<Point>)> {
        let pass = self.pass(x)?;
        let (mut v, mut g) = self.combine(&pass, |a, b| a * b);
        self.add_flux(x, &mut v, &mut g);
        Ok((v, g))
    }

    pub fn eval_kr(&self, x: &Configuration) -> Result<f64> {
        Ok(self.eval_kr_grad(x)?.0)
    }

    pub fn eval_h_grad(&self, x: &Configuration) -> Result<(f64, Vec<Point>)> {
        let (mut v, mut g) = self.eval_kr_grad(x)?;
        self.add_extra(x, &mut v, &mut g);
        Ok((v, g))
    }

    pub fn eval_h(&self, x: &Configuration) -> Result<f64> {
        Ok(self.eval_h_grad(x)?.0)
    }

    pub fn grad_h(&self, x: &Configuration) -> Result<Vec<Point>> {
        Ok(self.eval_h_grad(x)?.1)
    }

    pub fn eval_phi(&self, x: &Configuration) -> Result<PhiEval> {
        let pass = self.pass(x)?;
        let (value, grad) = self.combine(&pass, |a, b| -(a * b).abs());
        Ok(PhiEval { value, grad })
    }

    pub fn evaluate(&self, x: &Configuration) -> Result<Evaluation> {
        let pass = self.pass(x)?;
        let (mut h, mut grad_h) = self.combine(&pass, |a, b| a * b);
        self.add_flux(x, &mut h, &mut grad_h);
        self.add_extra(x, &mut h, &mut grad_h);
        let (phi, grad_phi) = self.combine(&pass, |a, b| -(a * b).abs());
        Ok(Evaluation {
            h,
            grad_h,
            phi,
            grad_phi,
        })
    }
}

pub fn flat_norm(v: &[Point]) -> f64 {
    v.iter().map(|p| p.norm_squared()).sum::<f64>().sqrt()
}

pub fn flat_dot(a: &[Point], b: &[Point]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p.dot(q)).sum()
}
