//! Critical points of `H`: linking cycles, the constrained ascending flow on
//! `D = {Φ ≥ −M₀}` as a candidate generator, and Newton as the certifier.

pub mod calibrate;
pub mod cluster;
pub mod cycle;
pub mod field;
pub mod flow;
pub mod n2;
pub mod newton;

use rayon::prelude::*;

pub use calibrate::{calibrate_region, require_applicable, sup_on_linking_set, Calibration};
pub use cluster::{cluster, orbit_distance};
pub use cycle::{gamma0, in_linking_set, linking_witness, CycleSample, LinkingCycle, LinkingWitness};
pub use field::{blend_field, constrained_field, constrained_field_eval, field_ratio, FieldEval};
pub use flow::{ascend_flow, run_flow, FlowParams, FlowSample, FlowState, SampleStatus};
pub use n2::{find_equilibrium_n2, N2Params, N2Search};
pub use newton::{fd_hessian, hessian_eigs, newton_refine, EquilibriumResult};

use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianModel;

#[derive(Debug, Clone, PartialEq)]
pub struct SearchParams {
    pub tol: f64,
    pub max_newton: usize,
    pub candidate_tol: f64,
    pub max_steps: usize,
    pub record_every: Option<usize>,
    pub seed: u64,
}

impl Default for SearchParams {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_newton: 50,
            candidate_tol: 1e-3,
            max_steps: 3000,
            record_every: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumRun {
    pub calibration: Calibration,
    pub flow: FlowState,
    /// Distinct accepted equilibria, ordered by `H`.
    pub results: Vec<EquilibriumResult>,
    /// Candidates whose refinement failed or left `D`.
    pub rejected: Vec<Error>,
    /// The flow was rerun on a refined patch of the cycle.
    pub refined: bool,
}

/// Calibrates, flows the cycle, and refines every candidate.
pub fn find_equilibria(m: &HamiltonianModel, cycle: &LinkingCycle, p: &SearchParams) -> Result<EquilibriumRun> {
    let cal = calibrate_region(m, cycle, p.seed)?;
    let mut fp = FlowParams::new(cal.m0, cal.a, cal.b);
    fp.candidate_tol = p.candidate_tol;
    fp.max_steps = p.max_steps;
    fp.record_every = p.record_every;
    fp.seed = p.seed;
    let mut state = run_flow(m, &cycle.samples(), &fp)?;
    let mut refined = false;
    if state.candidates().next().is_none() {
        let best = state
            .ensemble
            .iter()
            .filter(|s| s.status != SampleStatus::Invalid && s.residual.is_finite())
            .min_by(|a, b| a.residual.total_cmp(&b.residual))
            .ok_or_else(|| Error::NoCandidate("every cycle sample is invalid".into()))?;
        let width = 2.0 * std::f64::consts::PI / cycle.resolution() as f64;
        let patch = cycle.samples_near(&best.angles, width, 9);
        fp.m0 = state.m0;
        state = run_flow(m, &patch, &fp)?;
        refined = true;
    }
    if state.candidates().next().is_none() {
        return Err(Error::NoCandidate(format!(
            "{} escaped, {} stalled, {} exhausted after refining the cycle",
            state.count(SampleStatus::Escaped),
            state.count(SampleStatus::Stalled),
            state.count(SampleStatus::Exhausted)
        )));
    }
    let m0 = state.m0;
    let outcomes: Vec<Result<EquilibriumResult>> = state
        .candidates()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|s| {
            let mut r = newton_refine(m, &s.x, p.tol, p.max_newton)?;
            let margin = r.phi + m0;
            r.phi_margin = Some(margin);
            if margin <= 0.0 {
                return Err(Error::Refinement {
                    reason: format!("refined point left the flow region (Φ + M0 = {margin:e})"),
                    residual: r.residual,
                    iterations: r.iterations,
                });
            }
            Ok(r)
        })
        .collect();
    let mut accepted = Vec::new();
    let mut rejected = Vec::new();
    for o in outcomes {
        match o {
            Ok(r) => accepted.push(r),
            Err(e) => rejected.push(e),
        }
    }
    let mut results = cluster(m.backend().domain(), accepted);
    if results.is_empty() {
        return Err(Error::NoCandidate(format!(
            "{} candidates, none refined: {}",
            rejected.len(),
            rejected.first().map(|e| e.to_string()).unwrap_or_default()
        )));
    }
    results.sort_by(|a, b| a.value.total_cmp(&b.value));
    Ok(EquilibriumRun {
        calibration: cal,
        flow: state,
        results,
        rejected,
        refined,
    })
}
