//! Velocity, pressure and flow diagnostics of a grid solution.

use std::f64::consts::PI;

use super::grid::Arm;
use super::{primitive, GridSolution};
use crate::error::Result;
use crate::Point;

#[derive(Debug, Clone, PartialEq)]
pub struct FlowField {
    /// `v = J∇ψ = (−∂₂ψ, ∂₁ψ)` at every node.
    pub velocity: Vec<Point>,
    /// `P = F(ψ) − ½|∇ψ|²`, with `F′ = ω` along the streamlines.
    pub pressure: Vec<f64>,
}

pub fn velocity_and_pressure(sol: &GridSolution) -> FlowField {
    let g = &*sol.grid;
    let flux = &sol.flux;
    let boundary = |x: Point| flux.value(x);
    let lambda = sol.params.log_eps();
    let p = sol.params.p;
    let inv_eps2 = (sol.params.eps * sol.params.eps).recip();
    let mut velocity = Vec::with_capacity(g.len());
    let mut pressure = Vec::with_capacity(g.len());
    for k in 0..g.len() {
        let d = g.gradient(&sol.psi, k, &boundary);
        velocity.push(Point::new(-d.y, d.x));
        let f = if sol.gamma.is_empty() {
            0.0
        } else {
            let i = sol.owner[k];
            inv_eps2 * primitive(sol.gamma[i] > 0.0, sol.psi[k] - sol.gamma[i] * lambda / (2.0 * PI), p)
        };
        pressure.push(f - 0.5 * d.norm_squared());
    }
    FlowField { velocity, pressure }
}

/// Nodes whose neighbors all have four node neighbors themselves.
fn inner(sol: &GridSolution) -> impl Iterator<Item = (usize, [usize; 4])> + '_ {
    let g = &*sol.grid;
    (0..g.len()).filter_map(move |k| {
        let mut nb = [0usize; 4];
        for (d, arm) in g.arms(k).iter().enumerate() {
            match *arm {
                Arm::Node(m) => nb[d] = m,
                Arm::Boundary(_) => return None,
            }
        }
        Some((k, nb))
    })
}

impl FlowField {
    /// Largest centered-difference divergence over nodes whose neighbors
    /// also carry a full stencil.
    pub fn max_divergence(&self, sol: &GridSolution) -> f64 {
        let h = sol.grid.spacing();
        let g = &*sol.grid;
        sol.deep_nodes()
            .into_iter()
            .map(|k| {
                let [e, w, n, s] = g.arms(k).map(|a| match a {
                    Arm::Node(m) => m,
                    Arm::Boundary(_) => unreachable!(),
                });
                ((self.velocity[e].x - self.velocity[w].x) + (self.velocity[n].y - self.velocity[s].y)) / (2.0 * h)
            })
            .fold(0.0, |m: f64, d| m.max(d.abs()))
    }

    /// Largest `|v·ν − ∂ψ₀/∂τ|` over nodes within `band` of the boundary,
    /// with `ν` the interior normal at the nearest boundary point and
    /// `τ = (ν₂, −ν₁)` the positively oriented tangent.
    pub fn boundary_flux_defect(&self, sol: &GridSolution, band: f64) -> Result<f64> {
        let domain_defect = |k: usize| -> Result<Option<f64>> {
            let x = sol.grid.position(k);
            if sol.domain.dist_to_boundary(x)? > band {
                return Ok(None);
            }
            let frame = sol.domain.boundary_frame(x)?;
            let nu = frame.normal;
            let tau = Point::new(nu.y, -nu.x);
            let target = sol.flux.grad(frame.projection).dot(&tau);
            Ok(Some((self.velocity[k].dot(&nu) - target).abs()))
        };
        let mut worst: f64 = 0.0;
        for k in 0..sol.grid.len() {
            if let Some(d) = domain_defect(k)? {
                worst = worst.max(d);
            }
        }
        Ok(worst)
    }

    /// `max |(v·∇)ω|` over full-stencil nodes farther than `radius` from
    /// every vortex center.
    pub fn max_transport_residual(&self, sol: &GridSolution, radius: f64) -> f64 {
        let h = sol.grid.spacing();
        inner(sol)
            .filter(|&(k, _)| {
                let x = sol.grid.position(k);
                sol.centers.iter().all(|c| (x - c).norm() > radius)
            })
            .map(|(k, [e, w, n, s])| {
                let grad = Point::new(sol.omega[e] - sol.omega[w], sol.omega[n] - sol.omega[s]) / (2.0 * h);
                self.velocity[k].dot(&grad).abs()
            })
            .fold(0.0, f64::max)
    }
}
