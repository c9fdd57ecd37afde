//! Point-vortex motion `Γᵢ ẋᵢ = J ∇ᵢH`, integrated by the implicit midpoint
//! rule (symplectic) or classical RK4.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hamiltonian::{Configuration, HamiltonianModel};
use crate::Point;

pub const MIDPOINT_TOL: f64 = 1e-12;
pub const MIDPOINT_MAX_ITER: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    #[default]
    ImplicitMidpoint,
    Rk4,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub x: Configuration,
    pub h: f64,
}

/// Why an integration stopped before the final time.
#[derive(Debug, Clone, PartialEq)]
pub struct ProximityHalt {
    pub t: f64,
    /// Smallest pair or boundary distance at the halt.
    pub distance: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub points: Vec<TrajectoryPoint>,
    pub halted: Option<ProximityHalt>,
}

impl Trajectory {
    pub fn last(&self) -> &TrajectoryPoint {
        self.points.last().expect("a trajectory holds its initial point")
    }

    pub fn max_relative_drift(&self) -> f64 {
        let h0 = self.points[0].h;
        self.points
            .iter()
            .map(|p| ((p.h - h0) / h0).abs())
            .fold(0.0, f64::max)
    }
}

/// `ẋᵢ = (1/Γᵢ) (∂H/∂x_{i,2}, −∂H/∂x_{i,1})`.
pub fn velocity(m: &HamiltonianModel, x: &Configuration) -> Result<Vec<Point>> {
    let g = m.grad_h(x)?;
    Ok(g
        .iter()
        .zip(m.gamma())
        .map(|(d, gi)| Point::new(d.y, -d.x) / *gi)
        .collect())
}

fn shifted(x: &Configuration, v: &[Point], s: f64) -> Configuration {
    Configuration::new(x.points().iter().zip(v).map(|(p, d)| p + s * d).collect())
}

fn midpoint_step(m: &HamiltonianModel, x: &Configuration, dt: f64) -> Result<Configuration> {
    let v0 = velocity(m, x)?;
    let mut next = shifted(x, &v0, dt);
    for _ in 0..MIDPOINT_MAX_ITER {
        let mid = Configuration::new(
            x.points()
                .iter()
                .zip(next.points())
                .map(|(a, b)| 0.5 * (a + b))
                .collect(),
        );
        let cand = shifted(x, &velocity(m, &mid)?, dt);
        let change = cand
            .points()
            .iter()
            .zip(next.points())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        next = cand;
        if change < MIDPOINT_TOL {
            return Ok(next);
        }
    }
    Err(Error::Convergence(format!(
        "implicit midpoint iteration exceeded {MIDPOINT_MAX_ITER} iterations"
    )))
}

fn rk4_step(m: &HamiltonianModel, x: &Configuration, dt: f64) -> Result<Configuration> {
    let k1 = velocity(m, x)?;
    let k2 = velocity(m, &shifted(x, &k1, 0.5 * dt))?;
    let k3 = velocity(m, &shifted(x, &k2, 0.5 * dt))?;
    let k4 = velocity(m, &shifted(x, &k3, dt))?;
    Ok(Configuration::new(
        x.points()
            .iter()
            .enumerate()
            .map(|(i, p)| p + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
            .collect(),
    ))
}

/// One step of size `dt` (negative steps run time backwards).
pub fn step(m: &HamiltonianModel, x: &Configuration, dt: f64, scheme: Scheme) -> Result<Configuration> {
    match scheme {
        Scheme::ImplicitMidpoint => midpoint_step(m, x, dt),
        Scheme::Rk4 => rk4_step(m, x, dt),
    }
}

fn clearance(m: &HamiltonianModel, x: &Configuration) -> Result<f64> {
    let dom = m.backend().domain();
    let mut d = x.min_separation();
    for p in x.points() {
        d = d.min(dom.dist_to_boundary(*p)?);
    }
    Ok(d)
}

/// Integrates to time `t_final`, storing every `stride`-th step and the last.
pub fn integrate(
    m: &HamiltonianModel,
    x0: &Configuration,
    dt: f64,
    t_final: f64,
    scheme: Scheme,
    stride: usize,
) -> Result<Trajectory> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Parameter(format!("time step must be positive, got {dt}")));
    }
    if !(t_final >= 0.0 && t_final.is_finite()) {
        return Err(Error::Parameter(format!("final time must be nonnegative, got {t_final}")));
    }
    let stride = stride.max(1);
    let steps = (t_final / dt).round() as usize;
    let mut x = x0.clone();
    let mut points = vec![TrajectoryPoint {
        t: 0.0,
        x: x.clone(),
        h: m.eval_h(&x)?,
    }];
    for n in 1..=steps {
        let speed = velocity(m, &x)?.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let threshold = 10.0 * dt * speed;
        let distance = clearance(m, &x)?;
        if distance < threshold {
            let t = (n - 1) as f64 * dt;
            if points.last().map(|p| p.t) != Some(t) {
                points.push(TrajectoryPoint { t, h: m.eval_h(&x)?, x });
            }
            return Ok(Trajectory {
                points,
                halted: Some(ProximityHalt { t, distance, threshold }),
            });
        }
        x = step(m, &x, dt, scheme)?;
        if n % stride == 0 || n == steps {
            points.push(TrajectoryPoint {
                t: n as f64 * dt,
                h: m.eval_h(&x)?,
                x: x.clone(),
            });
        }
    }
    Ok(Trajectory { points, halted: None })
}

/// Independent trajectories in parallel; results keep the input order.
pub fn integrate_many(
    m: &HamiltonianModel,
    starts: &[Configuration],
    dt: f64,
    t_final: f64,
    scheme: Scheme,
    stride: usize,
) -> Vec<Result<Trajectory>> {
    starts
        .par_iter()
        .map(|x0| integrate(m, x0, dt, t_final, scheme, stride))
        .collect()
}
