//! Constrained ascending flow of the cycle samples.
//!
//! Each sample follows the field of [`super::field`] with adaptive explicit
//! Euler steps. A step is retried at half the size when it would leave the
//! configuration space, lower `H` by more than [`FlowParams::max_decrease`],
//! or cross `Φ = −M₀` by more than half the band.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::cycle::{CycleSample, LinkingCycle};
use super::field::{constrained_field_eval, field_ratio, FieldEval};
use crate::dynamics::TrajectoryPoint;
use crate::error::{Error, Result};
use crate::hamiltonian::{flat_norm, Configuration, HamiltonianModel};
use crate::Point;

#[derive(Debug, Clone, PartialEq)]
pub struct FlowParams {
    pub m0: f64,
    /// Blend band width; `None` means `0.05 · M₀`.
    pub band: Option<f64>,
    pub a: f64,
    pub b: f64,
    pub candidate_tol: f64,
    /// Accepted steps per sample.
    pub max_steps: usize,
    pub initial_step: f64,
    /// Largest tolerated decrease of `H` in one step.
    pub max_decrease: f64,
    /// Store every `k`-th accepted configuration of each sample.
    pub record_every: Option<usize>,
    pub seed: u64,
}

impl FlowParams {
    pub fn new(m0: f64, a: f64, b: f64) -> Self {
        Self {
            m0,
            band: None,
            a,
            b,
            candidate_tol: 1e-3,
            max_steps: 3000,
            initial_step: 1e-3,
            max_decrease: 1e-9,
            record_every: None,
            seed: 0,
        }
    }

    pub fn band(&self) -> f64 {
        self.band.unwrap_or(0.05 * self.m0)
    }

    fn validate(&self) -> Result<()> {
        let finite = [self.m0, self.a, self.b, self.candidate_tol, self.initial_step, self.max_decrease]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Parameter("flow parameters must be finite".into()));
        }
        if !(self.m0 > 0.0 && self.band() > 0.0) {
            return Err(Error::Parameter("M0 and the band must be positive".into()));
        }
        if self.a >= self.b {
            return Err(Error::Parameter(format!(
                "empty energy window: a = {} is not below b = {}",
                self.a, self.b
            )));
        }
        if !(self.candidate_tol > 0.0 && self.initial_step > 0.0 && self.max_decrease >= 0.0) {
            return Err(Error::Parameter("step controls must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleStatus {
    /// `|∇H|` fell below the candidate tolerance inside `[a, b]`.
    Candidate,
    /// `H` exceeded `b`.
    Escaped,
    /// The step size underflowed.
    Stalled,
    /// Step budget exhausted.
    Exhausted,
    /// The initial configuration was invalid.
    Invalid,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowSample {
    pub angles: Vec<f64>,
    pub x: Configuration,
    pub h: f64,
    pub residual: f64,
    /// Flow time reached.
    pub t: f64,
    pub steps: usize,
    pub status: SampleStatus,
    /// Smallest `Φ + M₀` along the trajectory.
    pub min_margin: f64,
    /// Largest single-step decrease of `H`.
    pub max_decrease: f64,
    /// Smallest `⟨∇H, ∇Φ⟩ / |∇Φ|²` seen in the band with `a ≤ H ≤ b`.
    pub multiplier: Option<f64>,
    /// A banded point in `[a, b]` had a negative multiplier and a field much
    /// shorter than `∇H`.
    pub violation: bool,
    pub path: Vec<TrajectoryPoint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    pub ensemble: Vec<FlowSample>,
    /// `M₀` actually used, after any regularity jitter.
    pub m0: f64,
    pub band: f64,
    pub a: f64,
    pub b: f64,
    pub jitters: usize,
}

impl FlowState {
    pub fn candidates(&self) -> impl Iterator<Item = &FlowSample> + '_ {
        self.ensemble.iter().filter(|s| s.status == SampleStatus::Candidate)
    }

    pub fn multiplier_diag(&self) -> Vec<Option<f64>> {
        self.ensemble.iter().map(|s| s.multiplier).collect()
    }

    pub fn count(&self, status: SampleStatus) -> usize {
        self.ensemble.iter().filter(|s| s.status == status).count()
    }

    pub fn min_margin(&self) -> f64 {
        self.ensemble
            .iter()
            .filter(|s| s.status != SampleStatus::Invalid)
            .map(|s| s.min_margin)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_decrease(&self) -> f64 {
        self.ensemble.iter().map(|s| s.max_decrease).fold(0.0, f64::max)
    }

    pub fn has_violation(&self) -> bool {
        self.ensemble.iter().any(|s| s.violation)
    }
}

fn clearance(m: &HamiltonianModel, x: &Configuration) -> f64 {
    let dom = m.backend().domain();
    x.points()
        .iter()
        .map(|p| dom.dist_to_boundary(*p).unwrap_or(0.0))
        .fold(x.min_separation(), f64::min)
}

struct Ctx<'a> {
    m: &'a HamiltonianModel,
    p: &'a FlowParams,
    m0: f64,
    band: f64,
}

impl Ctx<'_> {
    fn eval(&self, x: &Configuration) -> Result<FieldEval> {
        constrained_field_eval(self.m, x, self.m0, self.band)
    }

    fn evolve(&self, start: &CycleSample) -> Result<FlowSample> {
        let p = self.p;
        let mut out = FlowSample {
            angles: start.angles.clone(),
            x: start.x.clone(),
            h: f64::NAN,
            residual: f64::NAN,
            t: 0.0,
            steps: 0,
            status: SampleStatus::Invalid,
            min_margin: f64::INFINITY,
            max_decrease: 0.0,
            multiplier: None,
            violation: false,
            path: Vec::new(),
        };
        let mut fe = match self.eval(&start.x) {
            Ok(fe) => fe,
            Err(e @ Error::DegenerateBoundary(_)) => return Err(e),
            Err(_) => return Ok(out),
        };
        let record = |out: &mut FlowSample, x: &Configuration, h: f64| {
            out.path.push(TrajectoryPoint { t: out.t, x: x.clone(), h });
        };
        if p.record_every.is_some() {
            record(&mut out, &start.x, fe.eval.h);
        }
        let mut x = start.x.clone();
        let mut tau = p.initial_step;
        out.status = SampleStatus::Exhausted;
        loop {
            let h = fe.eval.h;
            out.h = h;
            out.residual = flat_norm(&fe.eval.grad_h);
            out.min_margin = out.min_margin.min(fe.eval.phi + self.m0);
            if h > p.b {
                out.status = SampleStatus::Escaped;
                break;
            }
            if out.residual < p.candidate_tol && h >= p.a {
                out.status = SampleStatus::Candidate;
                break;
            }
            if let Some(lambda) = fe.multiplier {
                if h >= p.a {
                    out.multiplier = Some(out.multiplier.map_or(lambda, |v: f64| v.min(lambda)));
                    if lambda < 0.0 && field_ratio(&fe) < 0.1 {
                        out.violation = true;
                    }
                }
            }
            if out.steps >= p.max_steps {
                break;
            }
            let speed = fe.field.iter().map(|v| v.norm()).fold(0.0, f64::max);
            if speed == 0.0 {
                out.status = SampleStatus::Stalled;
                break;
            }
            // never move a point by more than half the clearance
            tau = tau.min(0.5 * clearance(self.m, &x) / speed);
            let accepted = loop {
                let trial = Configuration::new(
                    x.points().iter().zip(&fe.field).map(|(a, v)| a + tau * v).collect::<Vec<Point>>(),
                );
                match self.eval(&trial) {
                    Ok(next)
                        if next.eval.h >= h - p.max_decrease
                            && next.eval.phi >= -self.m0 - 0.5 * self.band =>
                    {
                        break Some((trial, next));
                    }
                    Err(e @ Error::DegenerateBoundary(_)) => return Err(e),
                    _ => {
                        tau *= 0.5;
                        if tau < 1e-16 {
                            break None;
                        }
                    }
                }
            };
            let Some((trial, next)) = accepted else {
                out.status = SampleStatus::Stalled;
                break;
            };
            out.max_decrease = out.max_decrease.max(h - next.eval.h);
            out.t += tau;
            out.steps += 1;
            x = trial;
            fe = next;
            if let Some(k) = p.record_every {
                if out.steps.is_multiple_of(k.max(1)) {
                    record(&mut out, &x, fe.eval.h);
                }
            }
            tau *= 1.25;
        }
        out.x = x;
        Ok(out)
    }
}

/// Flows the given samples; samples never error individually, but a
/// degenerate level set `Φ = −M₀` restarts the run with `M₀` jittered by a
/// relative `1e−6`.
pub fn run_flow(m: &HamiltonianModel, samples: &[CycleSample], p: &FlowParams) -> Result<FlowState> {
    p.validate()?;
    let band = p.band();
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut m0 = p.m0;
    for jitters in 0..8 {
        let ctx = Ctx { m, p, m0, band };
        let run: Result<Vec<FlowSample>> = samples.par_iter().map(|s| ctx.evolve(s)).collect();
        match run {
            Ok(ensemble) => {
                return Ok(FlowState {
                    ensemble,
                    m0,
                    band,
                    a: p.a,
                    b: p.b,
                    jitters,
                })
            }
            Err(Error::DegenerateBoundary(_)) => {
                m0 = p.m0 * (1.0 + 1e-6 * rng.gen_range(-1.0..1.0));
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::DegenerateBoundary(0.0))
}

/// Flows every sample of the cycle and fails when no candidate appears.
pub fn ascend_flow(m: &HamiltonianModel, cycle: &LinkingCycle, p: &FlowParams) -> Result<FlowState> {
    if m.len() != cycle.n() {
        return Err(Error::Arity(format!(
            "model has {} vortices, cycle is for {}",
            m.len(),
            cycle.n()
        )));
    }
    p.validate()?;
    let samples = cycle.samples();
    let min_h = samples
        .iter()
        .filter_map(|s| m.eval_h(&s.x).ok())
        .fold(f64::INFINITY, f64::min);
    if !min_h.is_finite() {
        return Err(Error::Parameter("the cycle leaves the configuration space".into()));
    }
    if p.b <= min_h {
        return Err(Error::Parameter(format!(
            "b = {} does not exceed the cycle minimum {min_h}",
            p.b
        )));
    }
    let state = run_flow(m, &samples, p)?;
    if state.candidates().next().is_none() {
        return Err(Error::NoCandidate(format!(
            "{} escaped, {} stalled, {} exhausted; try a larger M0 or a finer cycle",
            state.count(SampleStatus::Escaped),
            state.count(SampleStatus::Stalled),
            state.count(SampleStatus::Exhausted)
        )));
    }
    Ok(state)
}
