//! Two counter-rotating vortices: `H → −∞` at the boundary of `𝓕₂(Ω)`, so
//! `H` attains an interior maximum, found by multistart ascent and Newton.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::newton::{newton_refine, EquilibriumResult};
use crate::error::{Error, Result};
use crate::hamiltonian::{flat_norm, Configuration, HamiltonianModel};
use crate::hypotheses::{applicability, Theorem};
use crate::Point;

#[derive(Debug, Clone, PartialEq)]
pub struct N2Params {
    pub starts: usize,
    pub tol: f64,
    /// Ascent hands over to Newton below this gradient norm.
    pub handover: f64,
    pub max_steps: usize,
    pub seed: u64,
}

impl Default for N2Params {
    fn default() -> Self {
        Self {
            starts: 20,
            tol: 1e-10,
            handover: 1e-4,
            max_steps: 20000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct N2Search {
    pub best: EquilibriumResult,
    /// Every start that refined successfully, in start order.
    pub converged: Vec<EquilibriumResult>,
    pub failed: usize,
}

fn ascend(m: &HamiltonianModel, x0: Configuration, handover: f64, max_steps: usize) -> Option<Configuration> {
    let dom = m.backend().domain();
    let (mut h, mut g) = m.eval_h_grad(&x0).ok()?;
    let mut x = x0;
    let mut tau: f64 = 1e-3;
    for _ in 0..max_steps {
        let r = flat_norm(&g);
        if r < handover {
            return Some(x);
        }
        let clear = x
            .points()
            .iter()
            .map(|p| dom.dist_to_boundary(*p).unwrap_or(0.0))
            .fold(x.min_separation(), f64::min);
        let speed = g.iter().map(|v| v.norm()).fold(0.0, f64::max);
        tau = tau.min(0.5 * clear / speed);
        let trial = Configuration::new(x.points().iter().zip(&g).map(|(p, d)| p + tau * d).collect::<Vec<Point>>());
        match m.eval_h_grad(&trial) {
            Ok((ht, gt)) if ht >= h => {
                x = trial;
                h = ht;
                g = gt;
                tau *= 1.25;
            }
            _ => {
                tau *= 0.5;
                if tau < 1e-16 {
                    return None;
                }
            }
        }
    }
    None
}

pub fn find_equilibrium_n2(m: &HamiltonianModel, p: &N2Params) -> Result<N2Search> {
    if m.len() != 2 {
        return Err(Error::Arity(format!("expected 2 vortices, got {}", m.len())));
    }
    if applicability(m.strengths())?.applicable != Theorem::N2 {
        return Err(Error::Strengths("Γ₁Γ₂ must be negative".into()));
    }
    let dom = m.backend().domain();
    let r = dom.inradius();
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut starts = Vec::with_capacity(p.starts);
    while starts.len() < p.starts {
        let a = dom.sample_interior(&mut rng, 0.1 * r);
        let b = dom.sample_interior(&mut rng, 0.1 * r);
        if (a - b).norm() > 0.1 * r {
            starts.push(Configuration::new(vec![a, b]));
        }
    }
    let outcomes: Vec<Option<EquilibriumResult>> = starts
        .into_par_iter()
        .map(|x0| {
            let x = ascend(m, x0, p.handover, p.max_steps)?;
            newton_refine(m, &x, p.tol, 50).ok()
        })
        .collect();
    let failed = outcomes.iter().filter(|o| o.is_none()).count();
    let converged: Vec<EquilibriumResult> = outcomes.into_iter().flatten().collect();
    let best = converged
        .iter()
        .max_by(|a, b| a.value.total_cmp(&b.value))
        .cloned()
        .ok_or_else(|| Error::NoCandidate(format!("all {} starts failed to converge", p.starts)))?;
    Ok(N2Search {
        best,
        converged,
        failed,
    })
}
