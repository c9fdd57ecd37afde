//! Energy window `[a, b]` and barrier level `M₀` for the flow.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::cycle::LinkingCycle;
use super::flow::{run_flow, FlowParams};
use crate::error::{Error, Result};
use crate::hamiltonian::{Configuration, HamiltonianModel};
use crate::hypotheses::{applicability, Theorem};
use crate::Point;

#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub a: f64,
    pub b: f64,
    pub m0: f64,
    pub cycle_min_h: f64,
    pub linking_sup_h: f64,
    /// Maximizer of `H` found on the linking set.
    pub linking_argmax: Configuration,
    pub cycle_min_phi: f64,
    pub doublings: u32,
    /// Probe flow steps per sample.
    pub probe_steps: usize,
}

pub const M0_GROWTH_CAP: f64 = 1048576.0;

/// Refuses strengths for which no existence result applies to this arity.
pub fn require_applicable(m: &HamiltonianModel) -> Result<Theorem> {
    let report = applicability(m.strengths())?;
    let wanted = match m.len() {
        2 => Theorem::N2,
        3 => Theorem::N3,
        4 => Theorem::N4,
        n => return Err(Error::Arity(format!("equilibrium search covers 2 to 4 vortices, got {n}"))),
    };
    if report.applicable == wanted {
        Ok(wanted)
    } else {
        Err(Error::Strengths(format!(
            "hypotheses fail: {}",
            report.failures.join("; ")
        )))
    }
}

/// Collinear chain `x₂ = p`, `x₁ = p − s e`, `x₃ = p + t e`, `x₄ = x₃ + w e`
/// with `e = (cos θ, sin θ)`; parameters `(p₁, p₂, θ, ln s, ln t[, ln w])`.
fn chain(q: &[f64]) -> Configuration {
    let p = Point::new(q[0], q[1]);
    let e = Point::new(q[2].cos(), q[2].sin());
    let (s, t) = (q[3].exp(), q[4].exp());
    let mut pts = vec![p - s * e, p, p + t * e];
    if q.len() == 6 {
        pts.push(p + (t + q[5].exp()) * e);
    }
    Configuration::new(pts)
}

fn chain_value_grad(m: &HamiltonianModel, q: &[f64]) -> Option<(f64, Vec<f64>)> {
    let x = chain(q);
    let (h, g) = m.eval_h_grad(&x).ok()?;
    let e = Point::new(q[2].cos(), q[2].sin());
    let perp = Point::new(-e.y, e.x);
    let (s, t) = (q[3].exp(), q[4].exp());
    let total = g.iter().fold(Point::zeros(), |a, b| a + b);
    let mut dq = vec![
        total.x,
        total.y,
        g[0].dot(&(-s * perp)) + g[2].dot(&(t * perp)),
        g[0].dot(&(-s * e)),
        g[2].dot(&(t * e)),
    ];
    if q.len() == 6 {
        let w = q[5].exp();
        dq[2] += g[3].dot(&((t + w) * perp));
        dq[4] += g[3].dot(&(t * e));
        dq.push(g[3].dot(&(w * e)));
    }
    Some((h, dq))
}

/// Multistart gradient ascent of `H` over the linking set.
pub fn sup_on_linking_set(m: &HamiltonianModel, starts: usize, seed: u64) -> Result<(f64, Configuration)> {
    let n = m.len();
    if n != 3 && n != 4 {
        return Err(Error::Arity(format!("linking sets exist for 3 or 4 vortices, got {n}")));
    }
    let dom = m.backend().domain();
    let r = dom.inradius();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut tries = 0;
    let mut done = 0;
    while done < starts && tries < 100 * starts {
        tries += 1;
        let p = dom.sample_interior(&mut rng, 0.1 * r);
        let mut q = vec![p.x, p.y, rng.gen_range(0.0..2.0 * PI)];
        for _ in 0..n - 1 {
            q.push((r * rng.gen_range(0.05..0.4f64)).ln());
        }
        let Some((mut h, mut g)) = chain_value_grad(m, &q) else {
            continue;
        };
        done += 1;
        let mut tau = 1e-3;
        for _ in 0..400 {
            let trial: Vec<f64> = q.iter().zip(&g).map(|(a, d)| a + tau * d).collect();
            match chain_value_grad(m, &trial) {
                Some((ht, gt)) if ht >= h => {
                    let gain = ht - h;
                    q = trial;
                    h = ht;
                    g = gt;
                    tau *= 1.5;
                    if gain < 1e-12 * (1.0 + h.abs()) {
                        break;
                    }
                }
                _ => {
                    tau *= 0.5;
                    if tau < 1e-14 {
                        break;
                    }
                }
            }
        }
        if best.as_ref().is_none_or(|(bh, _)| h > *bh) {
            best = Some((h, q));
        }
    }
    let (h, q) = best.ok_or_else(|| Error::Calibration("no valid start on the linking set".into()))?;
    Ok((h, chain(&q)))
}

/// Chooses `a`, `b` around the cycle minimum and the linking supremum, then
/// doubles `M₀` until a probe flow sees no banded point in `[a, b]` where
/// the field nearly cancels `∇H` against the barrier.
pub fn calibrate_region(m: &HamiltonianModel, cycle: &LinkingCycle, seed: u64) -> Result<Calibration> {
    require_applicable(m)?;
    if m.len() != cycle.n() {
        return Err(Error::Arity(format!(
            "model has {} vortices, cycle is for {}",
            m.len(),
            cycle.n()
        )));
    }
    let samples = cycle.samples();
    let mut cycle_min_h = f64::INFINITY;
    let mut cycle_min_phi = f64::INFINITY;
    for s in &samples {
        let ev = m.evaluate(&s.x)?;
        cycle_min_h = cycle_min_h.min(ev.h);
        cycle_min_phi = cycle_min_phi.min(ev.phi);
    }
    let (sup, argmax) = sup_on_linking_set(m, 16, seed)?;
    if !sup.is_finite() {
        return Err(Error::Calibration("supremum over the linking set is not finite".into()));
    }
    let a = cycle_min_h - 0.1 * (1.0 + cycle_min_h.abs());
    let b = sup.max(cycle_min_h) + 0.1 * (1.0 + sup.abs());

    let initial = 2.0 * (-cycle_min_phi).max(1.0);
    let probe_steps = 200;
    let mut m0 = initial;
    let mut doublings = 0;
    loop {
        let mut p = FlowParams::new(m0, a, b);
        p.max_steps = probe_steps;
        p.seed = seed;
        let state = run_flow(m, &samples, &p)?;
        if !state.has_violation() {
            return Ok(Calibration {
                a,
                b,
                m0: state.m0,
                cycle_min_h,
                linking_sup_h: sup,
                linking_argmax: argmax,
                cycle_min_phi,
                doublings,
                probe_steps,
            });
        }
        m0 *= 2.0;
        doublings += 1;
        if m0 > M0_GROWTH_CAP * initial {
            return Err(Error::Calibration(format!(
                "M0 grew past {M0_GROWTH_CAP} times its initial value {initial}"
            )));
        }
    }
}
