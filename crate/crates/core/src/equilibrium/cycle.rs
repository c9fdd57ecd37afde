//! Reference cycles `γ₀` and the collinear linking sets ℒ₃, ℒ₄.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::hamiltonian::Configuration;
use crate::Point;

/// `e^{iζ}` with rounding residue at multiples of π/2 cleared, so that
/// cycle samples on the axis lie exactly on it.
fn unit(angle: f64) -> Point {
    let (s, c) = angle.sin_cos();
    let clean = |v: f64| if v.abs() < 4.0 * f64::EPSILON { 0.0 } else { v };
    Point::new(clean(c), clean(s))
}

/// Radius of the ball around the anchor that the cycle must fit in.
fn reach(n: usize, rho: f64) -> f64 {
    if n == 3 {
        2.0 * rho
    } else {
        4.0 * rho
    }
}

fn check_ball(domain: &Domain, n: usize, rho: f64, c: Point) -> Result<()> {
    if n != 3 && n != 4 {
        return Err(Error::Arity(format!("reference cycles exist for 3 or 4 vortices, got {n}")));
    }
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::Geometry(format!("cycle radius must be positive, got {rho}")));
    }
    let r = reach(n, rho);
    // the closed ball must avoid the boundary, and for the annulus the hole
    let ok = domain.contains(c)
        && domain.dist_to_boundary(c).map(|d| d > r).unwrap_or(false);
    if ok {
        Ok(())
    } else {
        Err(Error::Geometry(format!(
            "closed ball of radius {r} about ({}, {}) is not inside the domain",
            c.x, c.y
        )))
    }
}

/// `γ₀(ζ)` translated to the anchor `c`; `angles` holds `ζ` (N = 3) or
/// `(ζ₁, ζ₂)` (N = 4).
pub fn gamma0(domain: &Domain, n: usize, rho: f64, c: Point, angles: &[f64]) -> Result<Configuration> {
    check_ball(domain, n, rho, c)?;
    gamma0_unchecked(n, rho, c, angles)
}

fn gamma0_unchecked(n: usize, rho: f64, c: Point, angles: &[f64]) -> Result<Configuration> {
    let e1 = Point::new(1.0, 0.0);
    match (n, angles.len()) {
        (3, 1) => Ok(Configuration::new(vec![
            c + rho * unit(angles[0]),
            c,
            c + 2.0 * rho * e1,
        ])),
        (4, 2) => Ok(Configuration::new(vec![
            c + rho * unit(angles[0]),
            c,
            c + 3.0 * rho * e1,
            c + 3.0 * rho * e1 + rho * unit(angles[1]),
        ])),
        _ => Err(Error::Arity(format!(
            "{n} vortices need {} cycle angles, got {}",
            n - 2,
            angles.len()
        ))),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkingCycle {
    n: usize,
    rho: f64,
    center: Point,
    resolution: usize,
}

/// Sample of a cycle: its angles and the configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleSample {
    pub angles: Vec<f64>,
    pub x: Configuration,
}

pub const MIN_RESOLUTION: usize = 64;

impl LinkingCycle {
    pub fn new(domain: &Domain, n: usize, rho: f64, center: Point, resolution: usize) -> Result<Self> {
        check_ball(domain, n, rho, center)?;
        if resolution < MIN_RESOLUTION {
            return Err(Error::Parameter(format!(
                "cycle resolution {resolution} is below {MIN_RESOLUTION}"
            )));
        }
        Ok(Self {
            n,
            rho,
            center,
            resolution,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn center(&self) -> Point {
        self.center
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn at(&self, angles: &[f64]) -> Result<Configuration> {
        gamma0_unchecked(self.n, self.rho, self.center, angles)
    }

    /// Grid over S¹ (N = 3) or S¹ × S¹ (N = 4).
    pub fn samples(&self) -> Vec<CycleSample> {
        let m = self.resolution;
        let step = 2.0 * PI / m as f64;
        let grid: Vec<Vec<f64>> = if self.n == 3 {
            (0..m).map(|k| vec![k as f64 * step]).collect()
        } else {
            (0..m)
                .flat_map(|i| (0..m).map(move |j| vec![i as f64 * step, j as f64 * step]))
                .collect()
        };
        grid.into_iter()
            .map(|angles| CycleSample {
                x: self.at(&angles).expect("arity fixed at construction"),
                angles,
            })
            .collect()
    }

    /// Samples in a box of half-width `radius` around `angles`.
    pub fn samples_near(&self, angles: &[f64], radius: f64, per_axis: usize) -> Vec<CycleSample> {
        let per_axis = per_axis.max(2);
        let offsets: Vec<f64> = (0..per_axis)
            .map(|k| -radius + 2.0 * radius * k as f64 / (per_axis - 1) as f64)
            .collect();
        let grid: Vec<Vec<f64>> = if self.n == 3 {
            offsets.iter().map(|o| vec![angles[0] + o]).collect()
        } else {
            offsets
                .iter()
                .flat_map(|a| offsets.iter().map(move |b| vec![angles[0] + a, angles[1] + b]))
                .collect()
        };
        grid.into_iter()
            .map(|angles| CycleSample {
                x: self.at(&angles).expect("arity fixed at construction"),
                angles,
            })
            .collect()
    }
}

fn cross(a: Point, b: Point) -> f64 {
    a.x * b.y - a.y * b.x
}

/// `x_mid` lies strictly between `x_a` and `x_b` on a common line, up to
/// `tol` relative to the lengths involved.
fn between(xa: Point, xm: Point, xb: Point, tol: f64) -> bool {
    let (u, v) = (xa - xm, xb - xm);
    let scale = u.norm() * v.norm();
    scale > 0.0 && cross(u, v).abs() <= tol * scale && u.dot(&v) < 0.0
}

pub fn in_linking_set(x: &Configuration, tol: f64) -> Result<bool> {
    let p = x.points();
    match p.len() {
        3 => Ok(between(p[0], p[1], p[2], tol)),
        4 => Ok(between(p[0], p[1], p[2], tol) && between(p[1], p[2], p[3], tol)),
        n => Err(Error::Arity(format!("linking sets are defined for 3 or 4 vortices, got {n}"))),
    }
}

/// Ratio `(x₁ − x₂)/(x₃ − x₂)`; real and negative exactly on ℒ₃.
fn ratio(x: &Configuration) -> Complex64 {
    let p = x.points();
    let u = p[0] - p[1];
    let v = p[2] - p[1];
    Complex64::new(u.x, u.y) / Complex64::new(v.x, v.y)
}

/// A point of a closed curve of three-vortex configurations lying on ℒ₃.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkingWitness {
    pub parameter: f64,
    /// Sampling resolution at which the witness was bracketed.
    pub resolution: usize,
    pub x: Configuration,
}

/// Finds `ζ` with `γ(ζ) ∈ ℒ₃` by bracketing a sign change of the imaginary
/// part of the ratio where its real part is negative, doubling the
/// resolution from `m0` up to `m_max` until a bracket appears.
pub fn linking_witness<F>(curve: F, tol: f64, m0: usize, m_max: usize) -> Option<LinkingWitness>
where
    F: Fn(f64) -> Configuration,
{
    let mut m = m0.max(4);
    while m <= m_max {
        let step = 2.0 * PI / m as f64;
        let vals: Vec<Complex64> = (0..=m).map(|k| ratio(&curve(k as f64 * step))).collect();
        for k in 0..m {
            let (a, b) = (vals[k], vals[k + 1]);
            if a.re < 0.0 && b.re < 0.0 && a.im * b.im <= 0.0 {
                let (mut lo, mut hi) = (k as f64 * step, (k + 1) as f64 * step);
                let mut flo = a.im;
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    let fm = ratio(&curve(mid)).im;
                    if (fm <= 0.0) == (flo <= 0.0) {
                        lo = mid;
                        flo = fm;
                    } else {
                        hi = mid;
                    }
                    if hi - lo < 1e-15 {
                        break;
                    }
                }
                let zeta = 0.5 * (lo + hi);
                let x = curve(zeta);
                if in_linking_set(&x, tol).unwrap_or(false) {
                    return Some(LinkingWitness {
                        parameter: zeta,
                        resolution: m,
                        x,
                    });
                }
            }
        }
        m *= 2;
    }
    None
}
