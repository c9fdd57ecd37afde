//! Cartesian grid on a domain with Shortley-Weller boundary arms.

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::Point;

/// Nodes closer than this fraction of `h` to the boundary are dropped.
const DROP: f64 = 1e-3;

/// Where a node's neighbor in one lattice direction lies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Arm {
    Node(usize),
    /// Boundary crossing at distance `t ≤ h`.
    Boundary(f64),
}

impl Arm {
    pub fn length(&self, h: f64) -> f64 {
        match *self {
            Arm::Node(_) => h,
            Arm::Boundary(t) => t,
        }
    }
}

/// Directions east, west, north, south.
pub const DIRS: [(i64, i64); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    h: f64,
    /// Lattice coordinates of each node; positions are `h · (i, j)`.
    ij: Vec<(i64, i64)>,
    arms: Vec<[Arm; 4]>,
}

impl Grid {
    pub fn new(domain: &Domain, h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::Parameter(format!("grid spacing must be positive, got {h}")));
        }
        let (lo, hi) = domain.bounding_box();
        let (i0, i1) = ((lo.x / h).floor() as i64, (hi.x / h).ceil() as i64);
        let (j0, j1) = ((lo.y / h).floor() as i64, (hi.y / h).ceil() as i64);
        let width = (i1 - i0 + 1) as usize;
        let slot = |i: i64, j: i64| -> Option<usize> {
            (i >= i0 && i <= i1 && j >= j0 && j <= j1).then(|| (j - j0) as usize * width + (i - i0) as usize)
        };
        let mut index = vec![usize::MAX; width * (j1 - j0 + 1) as usize];
        let mut ij = Vec::new();
        for j in j0..=j1 {
            for i in i0..=i1 {
                let x = Point::new(i as f64 * h, j as f64 * h);
                if domain.contains(x) && domain.dist_to_boundary(x)? > DROP * h {
                    index[slot(i, j).expect("in range")] = ij.len();
                    ij.push((i, j));
                }
            }
        }
        if ij.is_empty() {
            return Err(Error::Parameter(format!("grid spacing {h} leaves no interior node")));
        }
        let arms = ij
            .iter()
            .map(|&(i, j)| {
                let x = Point::new(i as f64 * h, j as f64 * h);
                DIRS.map(|(di, dj)| {
                    let dir = Point::new(di as f64, dj as f64);
                    let hit = domain.ray_to_boundary(x, dir).unwrap_or(f64::INFINITY);
                    let neighbor = slot(i + di, j + dj).map(|s| index[s]).filter(|&k| k != usize::MAX);
                    match neighbor {
                        Some(k) if hit > h => Arm::Node(k),
                        _ => Arm::Boundary(hit.min(h)),
                    }
                })
            })
            .collect();
        Ok(Self { h, ij, arms })
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.ij.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ij.is_empty()
    }

    pub fn position(&self, k: usize) -> Point {
        let (i, j) = self.ij[k];
        Point::new(i as f64 * self.h, j as f64 * self.h)
    }

    pub fn lattice(&self, k: usize) -> (i64, i64) {
        self.ij[k]
    }

    pub fn arms(&self, k: usize) -> &[Arm; 4] {
        &self.arms[k]
    }

    /// All four neighbors are grid nodes.
    pub fn is_regular(&self, k: usize) -> bool {
        self.arms[k].iter().all(|a| matches!(a, Arm::Node(_)))
    }

    /// Weights `(c_E, c_W, c_N, c_S, c_center)` of the Shortley-Weller
    /// Laplacian at node `k`.
    pub fn laplacian_weights(&self, k: usize) -> [f64; 5] {
        let l: [f64; 4] = self.arms[k].map(|a| a.length(self.h));
        let pair = |e: f64, w: f64| (2.0 / (e * (e + w)), 2.0 / (w * (e + w)), -2.0 / (e * w));
        let (ce, cw, cx) = pair(l[0], l[1]);
        let (cn, cs, cy) = pair(l[2], l[3]);
        [ce, cw, cn, cs, cx + cy]
    }

    /// Shortley-Weller Laplacian of nodal values `u` with boundary values
    /// `boundary(x)` at the arm ends.
    pub fn laplacian(&self, u: &[f64], boundary: impl Fn(Point) -> f64) -> Vec<f64> {
        (0..self.len())
            .map(|k| {
                let w = self.laplacian_weights(k);
                let mut s = w[4] * u[k];
                for (d, arm) in self.arms[k].iter().enumerate() {
                    s += w[d]
                        * match *arm {
                            Arm::Node(m) => u[m],
                            Arm::Boundary(t) => boundary(self.arm_end(k, d, t)),
                        };
                }
                s
            })
            .collect()
    }

    pub fn arm_end(&self, k: usize, d: usize, t: f64) -> Point {
        let (di, dj) = DIRS[d];
        self.position(k) + t * Point::new(di as f64, dj as f64)
    }

    /// Three-point derivatives `(∂₁, ∂₂)` of nodal values, using boundary
    /// values at the arm ends.
    pub fn gradient(&self, u: &[f64], k: usize, boundary: &impl Fn(Point) -> f64) -> Point {
        let val = |d: usize| match self.arms[k][d] {
            Arm::Node(m) => (u[m], self.h),
            Arm::Boundary(t) => (boundary(self.arm_end(k, d, t)), t),
        };
        let diff = |(fe, he): (f64, f64), (fw, hw): (f64, f64)| {
            (hw * hw * (fe - u[k]) + he * he * (u[k] - fw)) / (he * hw * (he + hw))
        };
        Point::new(diff(val(0), val(1)), diff(val(2), val(3)))
    }
}
