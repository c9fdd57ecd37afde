//! The ascending field on the region `D = {Φ ≥ −M₀}`.
//!
//! Away from `∂D` the field is `∇H`. In the band `−M₀ ≤ Φ ≤ −M₀ + band`
//! it blends towards the tangential projection
//! `V₀ = ∇H − (⟨∇H, ∇Φ⟩ / |∇Φ|²) ∇Φ` whenever `∇H` points out of `D`.

use crate::error::{Error, Result};
use crate::hamiltonian::{flat_dot, flat_norm, Configuration, Evaluation, HamiltonianModel};
use crate::Point;

/// Below this `|∇Φ|` the level set `Φ = −M₀` is treated as singular.
pub const DEGENERATE_GRAD_PHI: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct FieldEval {
    pub field: Vec<Point>,
    pub eval: Evaluation,
    /// `⟨∇H, ∇Φ⟩ / |∇Φ|²`, recorded inside the band.
    pub multiplier: Option<f64>,
    /// Weight of `∇H` in the blend: 0 on `Φ = −M₀`, 1 at the band's edge.
    pub blend: f64,
}

pub fn blend_field(eval: Evaluation, m0: f64, band: f64) -> Result<FieldEval> {
    let s = ((eval.phi + m0) / band).clamp(0.0, 1.0);
    if s >= 1.0 {
        return Ok(FieldEval {
            field: eval.grad_h.clone(),
            eval,
            multiplier: None,
            blend: 1.0,
        });
    }
    let np2 = flat_dot(&eval.grad_phi, &eval.grad_phi);
    if np2.sqrt() < DEGENERATE_GRAD_PHI {
        return Err(Error::DegenerateBoundary(np2.sqrt()));
    }
    let dot = flat_dot(&eval.grad_h, &eval.grad_phi);
    let lambda = dot / np2;
    let field = if dot <= 0.0 {
        eval.grad_h
            .iter()
            .zip(&eval.grad_phi)
            .map(|(gh, gp)| (1.0 - s) * (gh - lambda * gp) + s * gh)
            .collect()
    } else {
        eval.grad_h.clone()
    };
    Ok(FieldEval {
        field,
        eval,
        multiplier: Some(lambda),
        blend: s,
    })
}

pub fn constrained_field_eval(
    m: &HamiltonianModel,
    x: &Configuration,
    m0: f64,
    band: f64,
) -> Result<FieldEval> {
    if !(m0 > 0.0 && band > 0.0) {
        return Err(Error::Parameter(format!(
            "M0 and band must be positive, got {m0} and {band}"
        )));
    }
    blend_field(m.evaluate(x)?, m0, band)
}

pub fn constrained_field(m: &HamiltonianModel, x: &Configuration, m0: f64, band: f64) -> Result<Vec<Point>> {
    Ok(constrained_field_eval(m, x, m0, band)?.field)
}

/// `|V| / |∇H|`; small values mean the field nearly cancels `∇H`.
pub fn field_ratio(f: &FieldEval) -> f64 {
    let g = flat_norm(&f.eval.grad_h);
    if g == 0.0 {
        1.0
    } else {
        flat_norm(&f.field) / g
    }
}
