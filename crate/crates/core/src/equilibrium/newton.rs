//! Damped Newton refinement of critical points of `H`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::hamiltonian::{flat_norm, Configuration, HamiltonianModel};
use crate::Point;

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumResult {
    pub x: Configuration,
    /// `|∇H(x)|₂`.
    pub residual: f64,
    pub value: f64,
    /// Spectrum of the finite-difference Hessian, ascending.
    pub hessian_eigs: Vec<f64>,
    pub phi: f64,
    /// `Φ(x) + M₀` when the result came out of the flow region.
    pub phi_margin: Option<f64>,
    pub iterations: usize,
}

impl EquilibriumResult {
    /// Count of negative Hessian eigenvalues above the rotation null mode.
    pub fn morse_index(&self, zero_tol: f64) -> usize {
        self.hessian_eigs.iter().filter(|&&l| l < -zero_tol).count()
    }
}

fn clearance(m: &HamiltonianModel, x: &Configuration) -> f64 {
    let dom = m.backend().domain();
    x.points()
        .iter()
        .map(|p| dom.dist_to_boundary(*p).unwrap_or(0.0))
        .fold(x.min_separation(), f64::min)
}

fn flat(v: &[Point]) -> DVector<f64> {
    DVector::from_iterator(2 * v.len(), v.iter().flat_map(|p| [p.x, p.y]))
}

/// Central differences of the analytic gradient, symmetrized.
pub fn fd_hessian(m: &HamiltonianModel, x: &Configuration) -> Result<DMatrix<f64>> {
    let step = 1e-5 * (0.1 * clearance(m, x)).min(1.0);
    let base = x.to_flat();
    let n = base.len();
    let mut hess = DMatrix::zeros(n, n);
    for k in 0..n {
        let mut plus = base.clone();
        let mut minus = base.clone();
        plus[k] += step;
        minus[k] -= step;
        let gp = flat(&m.grad_h(&Configuration::from_flat(&plus))?);
        let gm = flat(&m.grad_h(&Configuration::from_flat(&minus))?);
        hess.set_column(k, &((gp - gm) / (2.0 * step)));
    }
    Ok(0.5 * (&hess + hess.transpose()))
}

pub fn hessian_eigs(m: &HamiltonianModel, x: &Configuration) -> Result<Vec<f64>> {
    let mut eigs: Vec<f64> = SymmetricEigen::new(fd_hessian(m, x)?).eigenvalues.iter().copied().collect();
    eigs.sort_by(f64::total_cmp);
    Ok(eigs)
}

/// Unit generator `(−yᵢ, xᵢ)` of rotations about the origin, if the model
/// is invariant under them.
fn rotation_generator(m: &HamiltonianModel, x: &Configuration) -> Option<DVector<f64>> {
    let invariant = m.backend().domain().is_rotation_invariant()
        && m.flux().re().iter().chain(m.flux().im()).skip(1).all(|&c| c == 0.0)
        && m.extra().is_none();
    if !invariant {
        return None;
    }
    let t = DVector::from_iterator(2 * x.len(), x.points().iter().flat_map(|p| [-p.y, p.x]));
    let norm = t.norm();
    (norm > 0.0).then(|| t / norm)
}

/// Newton direction `−H⁺ g`, in the quotient by rotations when their
/// Hessian eigenvalue vanishes.
fn direction(m: &HamiltonianModel, x: &Configuration, g: &DVector<f64>) -> Result<DVector<f64>> {
    let mut hess = fd_hessian(m, x)?;
    let scale = hess.norm();
    if let Some(t) = rotation_generator(m, x) {
        let rayleigh = (t.transpose() * &hess * &t)[(0, 0)];
        if rayleigh.abs() < 1e-8 * scale.max(1.0) {
            let p = DMatrix::identity(t.len(), t.len()) - &t * t.transpose();
            hess = &p * hess * &p;
        }
    }
    let eig = SymmetricEigen::new(hess);
    let cut = (1e-10 * scale).max(1e-8);
    let mut d = DVector::zeros(g.len());
    let mut kept = 0;
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda.abs() > cut {
            let v = eig.eigenvectors.column(k);
            d -= v * (v.dot(g) / lambda);
            kept += 1;
        }
    }
    if kept == 0 {
        return Err(Error::Refinement {
            reason: "Hessian is numerically zero".into(),
            residual: g.norm(),
            iterations: 0,
        });
    }
    Ok(d)
}

pub fn newton_refine(
    m: &HamiltonianModel,
    x0: &Configuration,
    tol: f64,
    max_iter: usize,
) -> Result<EquilibriumResult> {
    let fail = |reason: &str, residual: f64, iterations: usize| Error::Refinement {
        reason: reason.into(),
        residual,
        iterations,
    };
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::Parameter(format!("tolerance must be positive, got {tol}")));
    }
    let mut x = x0.clone();
    let mut g = m.grad_h(&x)?;
    let mut residual = flat_norm(&g);
    let mut iterations = 0;
    while residual > tol {
        if iterations >= max_iter {
            return Err(fail("iteration limit reached", residual, iterations));
        }
        let gv = flat(&g);
        let d = direction(m, &x, &gv).map_err(|_| fail("singular Hessian", residual, iterations))?;
        let base = x.to_flat();
        let mut alpha = 1.0;
        let mut next = None;
        for _ in 0..40 {
            let trial: Vec<f64> = base.iter().zip(d.iter()).map(|(b, s)| b + alpha * s).collect();
            let trial = Configuration::from_flat(&trial);
            if let Ok(gt) = m.grad_h(&trial) {
                let r = flat_norm(&gt);
                if r < residual {
                    next = Some((trial, gt, r));
                    break;
                }
            }
            alpha *= 0.5;
        }
        let Some((xn, gn, rn)) = next else {
            let reason = if m.grad_h(&Configuration::from_flat(
                &base.iter().zip(d.iter()).map(|(b, s)| b + s).collect::<Vec<_>>(),
            ))
            .is_err()
            {
                "Newton step leaves the configuration space"
            } else {
                "no decrease of the residual along the Newton direction"
            };
            return Err(fail(reason, residual, iterations));
        };
        x = xn;
        g = gn;
        residual = rn;
        iterations += 1;
    }
    let ev = m.evaluate(&x)?;
    Ok(EquilibriumResult {
        hessian_eigs: hessian_eigs(m, &x)?,
        residual,
        value: ev.h,
        phi: ev.phi,
        phi_margin: None,
        iterations,
        x,
    })
}
