//! Randomized checks of the structural properties a generalized Green
//! function must have: symmetry and a lower bound on `G`, an upper bound on
//! `g`, bounds away from the diagonal and the boundary, and boundedness of
//! the reflected remainder `ψ` in the collar.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::GreenBackend;
use crate::error::Result;
use crate::Point;

#[derive(Debug, Clone, PartialEq)]
pub struct ContractCheck {
    pub name: &'static str,
    /// Worst observed value of the checked quantity.
    pub value: f64,
    pub limit: f64,
    pub passed: bool,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContractReport {
    pub backend: &'static str,
    pub samples: usize,
    pub checks: Vec<ContractCheck>,
    /// Measured interior bound on `|G| + |∇ₓG| + |∇ᵧG|` and `|h| + |∇h|`.
    pub c1: f64,
    /// Measured collar bound on `|ψ| + |∇ₓψ| + |∇ᵧψ|`.
    pub c2: f64,
}

impl ContractReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&ContractCheck> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

fn check(name: &'static str, value: f64, limit: f64, passed: bool) -> ContractCheck {
    ContractCheck {
        name,
        value,
        limit,
        passed,
        note: None,
    }
}

/// Collar point at distance `d` along the normal through the frame of `x`.
fn along_normal(b: &GreenBackend, x: Point, d: f64) -> Result<Point> {
    let f = b.domain().boundary_frame(x)?;
    Ok(f.projection + d * f.normal)
}

fn collar_point<R: Rng>(b: &GreenBackend, rng: &mut R, d_min: f64) -> Result<(Point, f64)> {
    let dom = b.domain();
    let eps0 = dom.strip_width();
    loop {
        let x = dom.sample_interior(rng, 0.0);
        let d = dom.dist_to_boundary(x)?;
        if d > 0.0 && d < eps0 {
            // log-uniform depth in [d_min, 0.9 ε₀]
            let lo = d_min.max(1e-4 * eps0).ln();
            let hi = (0.9 * eps0).ln();
            let depth = rng.gen_range(lo..hi).exp();
            return Ok((along_normal(b, x, depth)?, depth));
        }
    }
}

fn psi_with_grads(b: &GreenBackend, x: Point, y: Point, step: f64) -> Result<f64> {
    let psi = b.psi_diagnostic(x, y)?;
    let mut grad = 0.0;
    for (ex, ey) in [(1.0, 0.0), (0.0, 1.0)] {
        let e = Point::new(ex, ey) * step;
        let dx = (b.psi_diagnostic(x + e, y)? - b.psi_diagnostic(x - e, y)?) / (2.0 * step);
        let dy = (b.psi_diagnostic(x, y + e)? - b.psi_diagnostic(x, y - e)?) / (2.0 * step);
        grad += dx * dx + dy * dy;
    }
    Ok(psi.abs() + grad.sqrt())
}

pub fn check_contracts(b: &GreenBackend, sample_count: usize, seed: u64) -> Result<ContractReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dom = b.domain();
    let inradius = dom.inradius();
    let eps = 0.05 * inradius;
    let near = b.near_field_distance();
    let margin = eps.max(near);
    let sym_tol = if b.is_analytic() { 1e-10 } else { 1e-6 };
    let g_cap = dom.diameter().ln() / (2.0 * PI);

    let (mut sym, mut min_g, mut max_g, mut c1) = (0.0f64, f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
    let mut pairs = 0;
    while pairs < sample_count {
        let x = dom.sample_interior(&mut rng, margin);
        let y = dom.sample_interior(&mut rng, margin);
        if (x - y).norm() < eps {
            continue;
        }
        pairs += 1;
        let gxy = b.eval_g(x, y)?;
        let gyx = b.eval_g(y, x)?;
        sym = sym.max((gxy.value - gyx.value).abs());
        min_g = min_g.min(gxy.value);
        max_g = max_g.max(b.eval_regular(x, y)?);
        c1 = c1.max(gxy.value.abs() + gxy.grad_x.norm() + gxy.grad_y.norm());
        let h = b.eval_robin(x)?;
        c1 = c1.max(h.value.abs() + h.grad.norm());
    }

    let mut checks = vec![
        check("symmetry", sym, sym_tol, sym <= sym_tol),
        check("lower bound of G", -min_g, sym_tol, min_g >= -sym_tol),
        check(
            "upper bound of g",
            max_g - g_cap,
            sym_tol,
            max_g <= g_cap + sym_tol,
        ),
        check("interior bound", c1, f64::INFINITY, c1.is_finite()),
    ];

    // Collar: depth-resolved bound on ψ and its gradients.
    let eps0 = dom.strip_width();
    let d_min = (2.0 * near).max(1e-4 * eps0);
    let (mut deep, mut outer) = (0.0f64, 0.0f64);
    let resolved = d_min < 0.5 * eps0;
    if resolved {
        let collar_pairs = (sample_count / 4).max(16);
        let mut done = 0;
        while done < collar_pairs {
            let (x, dx) = collar_point(b, &mut rng, d_min)?;
            let (y, dy) = collar_point(b, &mut rng, d_min)?;
            if (x - y).norm() < 1e-6 {
                continue;
            }
            let step = 0.01 * dx.min(dy);
            let v = psi_with_grads(b, x, y, step)?;
            if dx.max(dy) <= 0.1 * eps0 {
                deep = deep.max(v);
            } else {
                outer = outer.max(v);
            }
            done += 1;
        }
    }
    let c2 = deep.max(outer);
    let mut collar = check("collar bound", deep, outer + 1.0, c2.is_finite() && deep <= outer + 1.0);
    if !resolved {
        collar.note = Some("near-field zone covers the collar".into());
    } else if deep == 0.0 {
        collar.note = Some("no pair fell in the deep shell".into());
    }
    checks.push(collar);

    // h → −∞ at the boundary.
    let mut robin = check("robin divergence", 0.0, 0.0, true);
    if d_min < 0.05 * eps0 {
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..16 {
            let (x, _) = collar_point(b, &mut rng, d_min)?;
            let close = b.eval_robin(along_normal(b, x, d_min)?)?.value;
            let far = b.eval_robin(along_normal(b, x, 0.5 * eps0)?)?.value;
            worst = worst.max(close - far);
        }
        robin.value = worst;
        robin.passed = worst < 0.0;
    } else {
        robin.note = Some("near-field zone covers the collar".into());
    }
    checks.push(robin);

    Ok(ContractReport {
        backend: b.name(),
        samples: sample_count,
        checks,
        c1,
        c2,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossValidation {
    pub pairs: usize,
    pub max_dg: f64,
    pub max_dgrad: f64,
}

/// Compares two backends on the same domain at random pairs `margin` away
/// from the boundary.
pub fn cross_validate(
    a: &GreenBackend,
    b: &GreenBackend,
    pairs: usize,
    margin: f64,
    seed: u64,
) -> Result<CrossValidation> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = CrossValidation {
        pairs: 0,
        max_dg: 0.0,
        max_dgrad: 0.0,
    };
    while out.pairs < pairs {
        let x = a.domain().sample_interior(&mut rng, margin);
        let y = a.domain().sample_interior(&mut rng, margin);
        if (x - y).norm() < 1e-3 {
            continue;
        }
        out.pairs += 1;
        let (ga, gb) = (a.eval_g(x, y)?, b.eval_g(x, y)?);
        out.max_dg = out.max_dg.max((ga.value - gb.value).abs());
        out.max_dgrad = out
            .max_dgrad
            .max((ga.grad_x - gb.grad_x).norm())
            .max((ga.grad_y - gb.grad_y).norm());
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSample {
    pub dist: f64,
    /// `h(x) − (1/2π) ln 2d`.
    pub h_gap: f64,
    /// `d · |∇h(x) − ν / (2πd)|`.
    pub grad_gap: f64,
}

/// Robin function along the inward normal through the frame of `x0`.
pub fn robin_sweep(b: &GreenBackend, x0: Point, distances: &[f64]) -> Result<Vec<SweepSample>> {
    let f = b.domain().boundary_frame(x0)?;
    distances
        .iter()
        .map(|&d| {
            let h = b.eval_robin(f.projection + d * f.normal)?;
            Ok(SweepSample {
                dist: d,
                h_gap: h.value - (2.0 * d).ln() / (2.0 * PI),
                grad_gap: d * (h.grad - f.normal / (2.0 * PI * d)).norm(),
            })
        })
        .collect()
}
