//! Radial solutions of `−δ²Δw = (w − a)₊^p` in `B_R(0)` with `w = 0` on the
//! sphere.
//!
//! Inside the core `{w > a}` the excess `φ = w − a` is a rescaled
//! Lane-Emden function, `φ(r) = φ₀ Θ(r/ℓ)` with `ℓ = δ φ₀^{(1−p)/2}` and
//! `Θ″ + Θ′/s = −Θ^p`, `Θ(0) = 1`. Outside, `w = A ln(R/r)`. Matching `w` and
//! `w′` at the core radius fixes `A` in terms of `φ₀`, and `φ₀` is then
//! found by bisection on `A ln(R/r_c) = a`.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};

const STEP: f64 = 1e-3;

/// Tabulated `Θ` and `Θ′` on `[0, s₁]`, `s₁` the first zero.
#[derive(Debug, Clone, PartialEq)]
pub struct LaneEmden {
    p: f64,
    theta: Vec<f64>,
    dtheta: Vec<f64>,
    ddtheta: Vec<f64>,
    first_zero: f64,
    slope_at_zero: f64,
}

fn rhs(p: f64, s: f64, y: [f64; 2]) -> [f64; 2] {
    [y[1], -y[1] / s - y[0].max(0.0).powf(p)]
}

fn rk4(p: f64, s: f64, y: [f64; 2], h: f64) -> [f64; 2] {
    let add = |a: [f64; 2], b: [f64; 2], c: f64| [a[0] + c * b[0], a[1] + c * b[1]];
    let k1 = rhs(p, s, y);
    let k2 = rhs(p, s + 0.5 * h, add(y, k1, 0.5 * h));
    let k3 = rhs(p, s + 0.5 * h, add(y, k2, 0.5 * h));
    let k4 = rhs(p, s + h, add(y, k3, h));
    [
        y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ]
}

/// Cubic Hermite interpolant on `[0, h]` from end values and slopes.
fn hermite(t: f64, h: f64, f0: f64, d0: f64, f1: f64, d1: f64) -> (f64, f64) {
    let u = t / h;
    let (u2, u3) = (u * u, u * u * u);
    let f = (2.0 * u3 - 3.0 * u2 + 1.0) * f0
        + (u3 - 2.0 * u2 + u) * h * d0
        + (-2.0 * u3 + 3.0 * u2) * f1
        + (u3 - u2) * h * d1;
    let d = ((6.0 * u2 - 6.0 * u) * f0 + (3.0 * u2 - 4.0 * u + 1.0) * h * d0 + (-6.0 * u2 + 6.0 * u) * f1
        + (3.0 * u2 - 2.0 * u) * h * d1)
        / h;
    (f, d)
}

/// Quintic Hermite interpolant on `[0, h]` from end values and first and
/// second derivatives; returns the value and two derivatives at `t`.
fn quintic(t: f64, h: f64, a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    // p(u) = Σ cₖ uᵏ on u ∈ [0, 1] with scaled derivative data
    let (f0, d0, s0) = (a[0], a[1] * h, a[2] * h * h);
    let (f1, d1, s1) = (b[0], b[1] * h, b[2] * h * h);
    let c0 = f0;
    let c1 = d0;
    let c2 = 0.5 * s0;
    let c3 = 10.0 * (f1 - f0) - 6.0 * d0 - 4.0 * d1 - 1.5 * s0 + 0.5 * s1;
    let c4 = -15.0 * (f1 - f0) + 8.0 * d0 + 7.0 * d1 + 1.5 * s0 - s1;
    let c5 = 6.0 * (f1 - f0) - 3.0 * (d0 + d1) - 0.5 * s0 + 0.5 * s1;
    let u = t / h;
    let p = c0 + u * (c1 + u * (c2 + u * (c3 + u * (c4 + u * c5))));
    let dp = c1 + u * (2.0 * c2 + u * (3.0 * c3 + u * (4.0 * c4 + u * 5.0 * c5)));
    let ddp = 2.0 * c2 + u * (6.0 * c3 + u * (12.0 * c4 + u * 20.0 * c5));
    [p, dp / h, ddp / (h * h)]
}

impl LaneEmden {
    pub fn new(p: f64) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::Parameter(format!("exponent p must exceed 1, got {p}")));
        }
        // Θ = 1 − s²/4 + p s⁴/64 + O(s⁶) near the origin
        let series = |s: f64| (1.0 - s * s / 4.0 + p * s.powi(4) / 64.0, -s / 2.0 + p * s.powi(3) / 16.0);
        let mut theta = vec![1.0];
        let mut dtheta = vec![0.0];
        let (t1, d1) = series(STEP);
        theta.push(t1);
        dtheta.push(d1);
        let mut y = [t1, d1];
        let mut s = STEP;
        while y[0] > 0.0 {
            if s > 1e3 {
                return Err(Error::Profile("Lane-Emden solution has no zero".into()));
            }
            y = rk4(p, s, y, STEP);
            s += STEP;
            theta.push(y[0]);
            dtheta.push(y[1]);
        }
        let k = theta.len() - 2;
        let (f0, d0, f1, dd1) = (theta[k], dtheta[k], theta[k + 1], dtheta[k + 1]);
        let (mut lo, mut hi) = (0.0, STEP);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if hermite(mid, STEP, f0, d0, f1, dd1).0 > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let tz = 0.5 * (lo + hi);
        let first_zero = k as f64 * STEP + tz;
        let slope_at_zero = hermite(tz, STEP, f0, d0, f1, dd1).1;
        // Θ″ from the equation itself; Θ″(0) = −1/2
        let ddtheta = theta
            .iter()
            .zip(&dtheta)
            .enumerate()
            .map(|(k, (t, d))| if k == 0 { -0.5 } else { rhs(p, k as f64 * STEP, [*t, *d])[1] })
            .collect();
        Ok(Self {
            p,
            theta,
            dtheta,
            ddtheta,
            first_zero,
            slope_at_zero,
        })
    }

    pub fn exponent(&self) -> f64 {
        self.p
    }

    pub fn first_zero(&self) -> f64 {
        self.first_zero
    }

    /// `Θ′(s₁) < 0`.
    pub fn slope_at_zero(&self) -> f64 {
        self.slope_at_zero
    }

    /// `(Θ(s), Θ′(s))` for `0 ≤ s ≤ s₁`.
    pub fn eval(&self, s: f64) -> (f64, f64) {
        let [v, d, _] = self.eval2(s);
        (v, d)
    }

    /// `(Θ, Θ′, Θ″)` at `0 ≤ s ≤ s₁`.
    pub fn eval2(&self, s: f64) -> [f64; 3] {
        let s = s.clamp(0.0, self.first_zero);
        let k = ((s / STEP).floor() as usize).min(self.theta.len() - 2);
        let node = |k: usize| [self.theta[k], self.dtheta[k], self.ddtheta[k]];
        quintic(s - k as f64 * STEP, STEP, node(k), node(k + 1))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    pub a: f64,
    pub delta: f64,
    pub p: f64,
    pub r_max: f64,
    pub core_radius: f64,
    /// `w(0) − a`.
    pub peak_excess: f64,
    /// `A` in `w = A ln(R/r)` outside the core.
    pub log_coefficient: f64,
    lane_emden: Arc<LaneEmden>,
}

impl RadialProfile {
    fn scale(&self) -> f64 {
        self.core_radius / self.lane_emden.first_zero()
    }

    pub fn value(&self, r: f64) -> f64 {
        if r < self.core_radius {
            self.a + self.peak_excess * self.lane_emden.eval(r / self.scale()).0
        } else {
            self.log_coefficient * (self.r_max / r).ln()
        }
    }

    pub fn derivative(&self, r: f64) -> f64 {
        if r < self.core_radius {
            self.peak_excess * self.lane_emden.eval(r / self.scale()).1 / self.scale()
        } else {
            -self.log_coefficient / r
        }
    }

    /// `(r, w(r))` at `n + 1` equispaced radii on `[0, R]`.
    pub fn samples(&self, n: usize) -> Vec<(f64, f64)> {
        let n = n.max(1);
        (0..=n)
            .map(|k| {
                let r = self.r_max * k as f64 / n as f64;
                (r, self.value(r))
            })
            .collect()
    }

    /// `2π A`, the flux of `−∇w` through any circle outside the core.
    pub fn circulation(&self) -> f64 {
        2.0 * PI * self.log_coefficient
    }

    pub fn second_derivative(&self, r: f64) -> f64 {
        if r < self.core_radius {
            let l = self.scale();
            self.peak_excess * self.lane_emden.eval2(r / l)[2] / (l * l)
        } else {
            self.log_coefficient / (r * r)
        }
    }

    /// `−δ²(w″ + w′/r) − (w − a)₊^p` at `0 < r < R`.
    pub fn ode_residual(&self, r: f64) -> f64 {
        let lap = self.second_derivative(r) + self.derivative(r) / r;
        -self.delta * self.delta * lap - (self.value(r) - self.a).max(0.0).powf(self.p)
    }
}

/// Radial profile with plateau `a`; `p` fixes the Lane-Emden table, which
/// callers with many profiles can share through [`radial_profile_with`].
pub fn radial_profile(delta: f64, a: f64, r_max: f64, p: f64) -> Result<RadialProfile> {
    radial_profile_with(Arc::new(LaneEmden::new(p)?), delta, a, r_max)
}

pub fn radial_profile_with(le: Arc<LaneEmden>, delta: f64, a: f64, r_max: f64) -> Result<RadialProfile> {
    for (name, v) in [("delta", delta), ("a", a), ("R", r_max)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Parameter(format!("{name} must be positive, got {v}")));
        }
    }
    let p = le.exponent();
    let (s1, slope) = (le.first_zero(), -le.slope_at_zero());
    let core = |phi0: f64| delta * phi0.powf(0.5 * (1.0 - p)) * s1;
    let mismatch = |phi0: f64| phi0 * s1 * slope * (r_max / core(phi0)).ln() - a;
    // the core must fit in the ball: φ₀ above the value with r_c = R
    let lo_phi = (r_max / (delta * s1)).powf(2.0 / (1.0 - p));
    let (mut lo, mut hi) = (lo_phi.ln(), lo_phi.ln() + 1.0);
    let mut grow = 0;
    while mismatch(hi.exp()) <= 0.0 {
        hi += 2.0;
        grow += 1;
        if grow > 400 {
            return Err(Error::Profile(format!("no plateau match for a = {a}, delta = {delta}")));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mismatch(mid.exp()) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-15 * hi.abs().max(1.0) {
            break;
        }
    }
    let phi0 = (0.5 * (lo + hi)).exp();
    let core_radius = core(phi0);
    if !(core_radius > 0.0 && core_radius < r_max) {
        return Err(Error::Profile(format!("core radius {core_radius} is not inside the ball")));
    }
    Ok(RadialProfile {
        a,
        delta,
        p,
        r_max,
        core_radius,
        peak_excess: phi0,
        log_coefficient: a / (r_max / core_radius).ln(),
        lane_emden: le,
    })
}
