//! Desingularization of point-vortex equilibria into steady Euler flows.
//!
//! The stream function solves
//! `−ε²Δψ = Σᵢ fᵢ(ψ + (Γᵢ/2π) ln ε)` with `ψ = ψ₀` on `∂Ω`, where
//! `fᵢ(t) = t₊^p` for `Γᵢ > 0` and `fᵢ(t) = −t₋^p` for `Γᵢ < 0`. In the
//! variable `u = (2π/|ln ε|)(ψ − ψ₀)` this reads
//! `−δ²Δu = Σᵢ fᵢ(u − Γᵢ + 2πψ₀/|ln ε|)`, `u = 0` on `∂Ω`, with
//! `δ = ε (2π/|ln ε|)^{(p−1)/2}`. Each `fᵢ` acts on the Voronoi cell of
//! `xᵢ` only. The discrete problem is solved by damped Newton from the
//! projected-profile ansatz.

pub mod fields;
pub mod grid;
pub mod profile;

use std::collections::{HashMap, HashSet, VecDeque};
use std::f64::consts::PI;
use std::sync::Arc;

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;

pub use fields::{velocity_and_pressure, FlowField};
pub use grid::{Arm, Grid};
pub use profile::{radial_profile, radial_profile_with, LaneEmden, RadialProfile};

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::green::GreenBackend;
use crate::hamiltonian::{Configuration, HamiltonianModel, HarmonicTerm};
use crate::Point;

#[derive(Debug, Clone, PartialEq)]
pub struct DesingParams {
    pub eps: f64,
    pub p: f64,
    /// Radius of the ball `B_R(0)` compactly containing the domain; `None`
    /// picks twice the farthest bounding-box corner.
    pub r_ball: Option<f64>,
    pub h: f64,
    pub tol: f64,
    pub max_newton: usize,
}

impl DesingParams {
    pub fn new(eps: f64, h: f64) -> Result<Self> {
        let p = Self {
            eps,
            p: 2.0,
            r_ball: None,
            h,
            tol: 1e-9,
            max_newton: 60,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_exponent(mut self, p: f64) -> Result<Self> {
        self.p = p;
        self.validate()?;
        Ok(self)
    }

    pub fn with_ball_radius(mut self, r: f64) -> Result<Self> {
        self.r_ball = Some(r);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::Parameter(format!("eps must lie in (0, 1), got {}", self.eps)));
        }
        if !(self.p > 1.0 && self.p.is_finite()) {
            return Err(Error::Parameter(format!("p must exceed 1, got {}", self.p)));
        }
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::Parameter(format!("grid spacing must be positive, got {}", self.h)));
        }
        if let Some(r) = self.r_ball {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::Parameter(format!("ball radius must be positive, got {r}")));
            }
        }
        Ok(())
    }

    pub fn log_eps(&self) -> f64 {
        -self.eps.ln()
    }

    pub fn delta(&self) -> f64 {
        self.eps * (2.0 * PI / self.log_eps()).powf(0.5 * (self.p - 1.0))
    }

    fn ball_radius(&self, domain: &Domain) -> Result<f64> {
        let (lo, hi) = domain.bounding_box();
        let reach = [lo, hi, Point::new(lo.x, hi.y), Point::new(hi.x, lo.y)]
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max);
        match self.r_ball {
            Some(r) if r <= reach => Err(Error::Parameter(format!(
                "ball radius {r} does not contain the domain (reach {reach})"
            ))),
            Some(r) => Ok(r),
            None => Ok(2.0 * reach),
        }
    }
}

/// Plateau and outer coefficient of one vortex in the initial guess.
#[derive(Debug, Clone, PartialEq)]
pub struct AnsatzVortex {
    pub a: f64,
    pub log_coefficient: f64,
    pub core_radius: f64,
    /// `sign(Γᵢ) |ln ε| A`, the circulation the ansatz carries.
    pub circulation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Blob {
    pub vortex: usize,
    pub centroid: Point,
    pub circulation: f64,
    pub support_diameter: f64,
    pub nodes: usize,
    pub components: usize,
}

#[derive(Debug, Clone)]
pub struct GridSolution {
    pub domain: Domain,
    pub grid: Arc<Grid>,
    pub params: DesingParams,
    pub gamma: Vec<f64>,
    pub centers: Vec<Point>,
    pub flux: HarmonicTerm,
    pub u: Vec<f64>,
    pub psi: Vec<f64>,
    pub omega: Vec<f64>,
    /// Voronoi owner of each node.
    pub owner: Vec<usize>,
    pub blobs: Vec<Blob>,
    /// Connected components of `{ω ≠ 0}`.
    pub components: usize,
    /// No component mixes Voronoi cells or signs.
    pub separated: bool,
    pub residual: f64,
    pub iterations: usize,
    pub ansatz: Vec<AnsatzVortex>,
    /// The solve went through an ε-continuation chain.
    pub continued: bool,
}

/// `fᵢ` and `fᵢ′` for a vortex of sign `s`.
fn nonlinearity(positive: bool, t: f64, p: f64) -> (f64, f64) {
    if positive {
        if t > 0.0 {
            (t.powf(p), p * t.powf(p - 1.0))
        } else {
            (0.0, 0.0)
        }
    } else if t < 0.0 {
        (-(-t).powf(p), p * (-t).powf(p - 1.0))
    } else {
        (0.0, 0.0)
    }
}

/// `Fᵢ(t) = ∫₀ᵗ fᵢ`.
pub(crate) fn primitive(positive: bool, t: f64, p: f64) -> f64 {
    let m = if positive { t.max(0.0) } else { (-t).max(0.0) };
    m.powf(p + 1.0) / (p + 1.0)
}

struct Problem<'a> {
    grid: &'a Grid,
    delta2: f64,
    p: f64,
    positive: Vec<bool>,
    /// `Γᵢ − 2πψ₀/|ln ε|` at each node for its owner.
    shift: Vec<f64>,
    owner: Vec<usize>,
}

impl Problem<'_> {
    fn arg(&self, u: &[f64], k: usize) -> f64 {
        u[k] - self.shift[k]
    }

    fn residual(&self, u: &[f64]) -> Vec<f64> {
        let lap = self.grid.laplacian(u, |_| 0.0);
        (0..u.len())
            .map(|k| {
                let f = if self.positive.is_empty() {
                    0.0
                } else {
                    nonlinearity(self.positive[self.owner[k]], self.arg(u, k), self.p).0
                };
                -self.delta2 * lap[k] - f
            })
            .collect()
    }

    fn derivative(&self, u: &[f64], k: usize) -> f64 {
        if self.positive.is_empty() {
            return 0.0;
        }
        nonlinearity(self.positive[self.owner[k]], self.arg(u, k), self.p).1
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Sparse Jacobian `−δ²L − diag(f′)` with a reusable symbolic factorization.
struct Jacobian {
    base: SparseColMat<usize, f64>,
    diag_slot: Vec<usize>,
    symbolic: SymbolicLu<usize>,
}

impl Jacobian {
    fn new(grid: &Grid, delta2: f64) -> Result<Self> {
        let mut trip = Vec::with_capacity(5 * grid.len());
        for k in 0..grid.len() {
            let w = grid.laplacian_weights(k);
            trip.push(Triplet::new(k, k, -delta2 * w[4]));
            for (d, arm) in grid.arms(k).iter().enumerate() {
                if let Arm::Node(m) = *arm {
                    trip.push(Triplet::new(k, m, -delta2 * w[d]));
                }
            }
        }
        let n = grid.len();
        let base = SparseColMat::try_new_from_triplets(n, n, &trip)
            .map_err(|e| Error::LinearSolver(format!("{e:?}")))?;
        let mut diag_slot = vec![usize::MAX; n];
        let sym = base.symbolic();
        for (c, slot) in diag_slot.iter_mut().enumerate() {
            for (off, &r) in sym.row_idx_of_col_raw(c).iter().enumerate() {
                if r == c {
                    *slot = sym.col_ptr()[c] + off;
                }
            }
        }
        let symbolic =
            SymbolicLu::try_new(base.symbolic()).map_err(|e| Error::LinearSolver(format!("{e:?}")))?;
        Ok(Self {
            base,
            diag_slot,
            symbolic,
        })
    }

    fn solve(&self, shift: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
        let mut mat = self.base.clone();
        let val = mat.val_mut();
        for (k, &s) in shift.iter().enumerate() {
            val[self.diag_slot[k]] -= s;
        }
        let lu = Lu::try_new_with_symbolic(self.symbolic.clone(), mat.as_ref())
            .map_err(|e| Error::LinearSolver(format!("{e:?}")))?;
        let b = Mat::from_fn(rhs.len(), 1, |i, _| rhs[i]);
        let x = lu.solve(&b);
        let out: Vec<f64> = (0..rhs.len()).map(|i| x[(i, 0)]).collect();
        if out.iter().all(|v| v.is_finite()) {
            Ok(out)
        } else {
            Err(Error::LinearSolver("non-finite Newton update".into()))
        }
    }
}

/// Damped Newton on the residual from `u`; returns iterations and the final
/// max-norm residual.
fn newton(pr: &Problem<'_>, u: &mut Vec<f64>, tol: f64, max_iter: usize) -> Result<(usize, f64)> {
    let mut r = pr.residual(u);
    let mut res = max_abs(&r);
    if res <= tol {
        return Ok((0, res));
    }
    let jac = Jacobian::new(pr.grid, pr.delta2)?;
    for it in 1..=max_iter {
        let d: Vec<f64> = (0..u.len()).map(|k| pr.derivative(u, k)).collect();
        let neg: Vec<f64> = r.iter().map(|x| -x).collect();
        let step = jac.solve(&d, &neg)?;
        let merit = norm2(&r);
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial: Vec<f64> = u.iter().zip(&step).map(|(a, s)| a + alpha * s).collect();
            let rt = pr.residual(&trial);
            if norm2(&rt) < merit || max_abs(&rt) <= tol {
                *u = trial;
                r = rt;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        res = max_abs(&r);
        if res <= tol {
            return Ok((it, res));
        }
        if !accepted {
            return Err(Error::Convergence(format!(
                "Newton line search failed at residual {res:e} after {it} iterations"
            )));
        }
    }
    Err(Error::Convergence(format!(
        "Newton did not reach {tol:e} in {max_iter} iterations (residual {res:e})"
    )))
}

fn voronoi(grid: &Grid, centers: &[Point]) -> Vec<usize> {
    (0..grid.len())
        .map(|k| {
            let x = grid.position(k);
            let mut best = 0;
            for (i, c) in centers.iter().enumerate() {
                if (x - c).norm() < (x - centers[best]).norm() {
                    best = i;
                }
            }
            best
        })
        .collect()
}

/// Plateau levels `aᵢ` making the projected-profile ansatz consistent at
/// each core edge: `u = Γᵢ − 2πψ₀(xᵢ)/|ln ε|` there.
fn ansatz_levels(
    backend: &GreenBackend,
    flux: &HarmonicTerm,
    gamma: &[f64],
    centers: &[Point],
    params: &DesingParams,
    le: &Arc<LaneEmden>,
    r_ball: f64,
) -> Result<Vec<RadialProfile>> {
    let n = gamma.len();
    let delta = params.delta();
    let lambda = params.log_eps();
    let sign: Vec<f64> = gamma.iter().map(|g| g.signum()).collect();
    let robin: Vec<f64> = centers
        .iter()
        .map(|&c| backend.eval_robin(c).map(|r| r.value))
        .collect::<Result<_>>()?;
    let mut green = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                green[i][j] = backend.eval_g(centers[i], centers[j])?.value;
            }
        }
    }
    let mut a: Vec<f64> = gamma.iter().map(|g| g.abs()).collect();
    let mut prof: Vec<RadialProfile> = a
        .iter()
        .map(|&ai| radial_profile_with(le.clone(), delta, ai, r_ball))
        .collect::<Result<_>>()?;
    for _ in 0..200 {
        let mut change: f64 = 0.0;
        for i in 0..n {
            let others: f64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| sign[j] * 2.0 * PI * prof[j].log_coefficient * green[i][j])
                .sum();
            let ai = &prof[i];
            let target = sign[i] * (gamma[i] - 2.0 * PI * flux.value(centers[i]) / lambda - others)
                - 2.0 * PI * ai.log_coefficient * robin[i]
                + ai.log_coefficient * r_ball.ln();
            if target.is_nan() || target <= 0.0 {
                return Err(Error::Profile(format!("plateau level for vortex {} is not positive", i + 1)));
            }
            let next = 0.5 * (a[i] + target);
            change = change.max((next - a[i]).abs());
            a[i] = next;
            prof[i] = radial_profile_with(le.clone(), delta, a[i], r_ball)?;
        }
        if change < 1e-13 {
            break;
        }
    }
    Ok(prof)
}

fn ansatz_field(
    grid: &Grid,
    backend: &GreenBackend,
    gamma: &[f64],
    centers: &[Point],
    prof: &[RadialProfile],
    r_ball: f64,
) -> Result<Vec<f64>> {
    (0..grid.len())
        .map(|k| {
            let x = grid.position(k);
            let mut u = 0.0;
            for i in 0..gamma.len() {
                let pi = &prof[i];
                let r = (x - centers[i]).norm();
                let g = if r > 1e-14 {
                    backend.eval_regular(x, centers[i])?
                } else {
                    backend.eval_robin(x)?.value
                };
                let pw = pi.value(r) + 2.0 * PI * pi.log_coefficient * g - pi.log_coefficient * r_ball.ln();
                u += gamma[i].signum() * pw;
            }
            Ok(u)
        })
        .collect()
}

/// Solves for the steady state around `centers`; `gamma` may be empty.
pub fn solve_with(
    backend: &GreenBackend,
    flux: &HarmonicTerm,
    gamma: &[f64],
    centers: &[Point],
    params: &DesingParams,
    guess: Option<&[f64]>,
) -> Result<GridSolution> {
    params.validate()?;
    if gamma.len() != centers.len() {
        return Err(Error::Arity(format!(
            "{} strengths for {} centers",
            gamma.len(),
            centers.len()
        )));
    }
    if gamma.iter().any(|g| *g == 0.0 || !g.is_finite()) {
        return Err(Error::Strengths("strengths must be finite and nonzero".into()));
    }
    let domain = backend.domain();
    if !gamma.is_empty() {
        Configuration::new(centers.to_vec()).validate(backend)?;
    }
    let grid = Arc::new(Grid::new(domain, params.h)?);
    let r_ball = params.ball_radius(domain)?;
    let le = Arc::new(LaneEmden::new(params.p)?);
    let lambda = params.log_eps();
    let owner = if gamma.is_empty() {
        vec![0; grid.len()]
    } else {
        voronoi(&grid, centers)
    };
    let (prof, ansatz) = if gamma.is_empty() {
        (Vec::new(), Vec::new())
    } else {
        let prof = ansatz_levels(backend, flux, gamma, centers, params, &le, r_ball)?;
        let ansatz = prof
            .iter()
            .zip(gamma)
            .map(|(p, g)| AnsatzVortex {
                a: p.a,
                log_coefficient: p.log_coefficient,
                core_radius: p.core_radius,
                circulation: g.signum() * lambda * p.log_coefficient,
            })
            .collect();
        (prof, ansatz)
    };
    let shift: Vec<f64> = (0..grid.len())
        .map(|k| {
            if gamma.is_empty() {
                0.0
            } else {
                gamma[owner[k]] - 2.0 * PI * flux.value(grid.position(k)) / lambda
            }
        })
        .collect();
    let pr = Problem {
        grid: &grid,
        delta2: params.delta().powi(2),
        p: params.p,
        positive: gamma.iter().map(|g| *g > 0.0).collect(),
        shift,
        owner: owner.clone(),
    };
    let mut u = match guess {
        Some(g) if g.len() == grid.len() => g.to_vec(),
        Some(_) => return Err(Error::Parameter("initial guess does not match the grid".into())),
        None if gamma.is_empty() => vec![0.0; grid.len()],
        None => ansatz_field(&grid, backend, gamma, centers, &prof, r_ball)?,
    };
    let (iterations, residual) = newton(&pr, &mut u, params.tol, params.max_newton)?;

    let scale = (params.eps * params.eps).recip() * (lambda / (2.0 * PI)).powf(params.p);
    let omega: Vec<f64> = (0..grid.len())
        .map(|k| {
            if gamma.is_empty() {
                0.0
            } else {
                scale * nonlinearity(pr.positive[owner[k]], pr.arg(&u, k), params.p).0
            }
        })
        .collect();
    let psi: Vec<f64> = (0..grid.len())
        .map(|k| flux.value(grid.position(k)) + lambda * u[k] / (2.0 * PI))
        .collect();
    let level: Vec<f64> = (0..grid.len()).map(|k| pr.arg(&u, k)).collect();
    let density = |i: usize, t: f64| scale * nonlinearity(pr.positive[i], t, params.p).0.abs();
    let (blobs, components, separated) = extract_blobs(&grid, &omega, &owner, centers, &level, density);
    Ok(GridSolution {
        domain: domain.clone(),
        grid,
        params: params.clone(),
        gamma: gamma.to_vec(),
        centers: centers.to_vec(),
        flux: flux.clone(),
        u,
        psi,
        omega,
        owner,
        blobs,
        components,
        separated,
        residual,
        iterations,
        ansatz,
        continued: false,
    })
}

/// Solves from the ansatz, falling back to continuation from larger ε.
pub fn solve_steady_state(m: &HamiltonianModel, x: &Configuration, params: &DesingParams) -> Result<GridSolution> {
    if x.len() != m.len() {
        return Err(Error::Arity(format!(
            "configuration has {} points, model has {} strengths",
            x.len(),
            m.len()
        )));
    }
    let direct = solve_with(m.backend(), m.flux(), m.gamma(), x.points(), params, None);
    match direct {
        Err(Error::Convergence(_)) | Err(Error::LinearSolver(_)) => continuation(m, x, params, 4),
        other => other,
    }
}

fn continuation(m: &HamiltonianModel, x: &Configuration, params: &DesingParams, depth: usize) -> Result<GridSolution> {
    let mut coarse = params.clone();
    coarse.eps = (2.0 * params.eps).min(0.5 * (1.0 + params.eps));
    let prev = match solve_with(m.backend(), m.flux(), m.gamma(), x.points(), &coarse, None) {
        Ok(s) => s,
        Err(e @ (Error::Convergence(_) | Error::LinearSolver(_))) if depth == 0 => return Err(e),
        Err(Error::Convergence(_)) | Err(Error::LinearSolver(_)) => continuation(m, x, &coarse, depth - 1)?,
        Err(e) => return Err(e),
    };
    let mut sol = solve_with(m.backend(), m.flux(), m.gamma(), x.points(), params, Some(&prev.u))?;
    sol.continued = true;
    Ok(sol)
}

/// Solves at each ε in order, seeding failed direct solves with the
/// previous solution.
pub fn solve_sequence(m: &HamiltonianModel, x: &Configuration, base: &DesingParams, eps: &[f64]) -> Result<Vec<GridSolution>> {
    let mut out: Vec<GridSolution> = Vec::with_capacity(eps.len());
    for &e in eps {
        let mut p = base.clone();
        p.eps = e;
        let sol = match solve_steady_state(m, x, &p) {
            Ok(s) => s,
            Err(err) => match out.last() {
                Some(prev) => {
                    let mut s = solve_with(m.backend(), m.flux(), m.gamma(), x.points(), &p, Some(&prev.u))
                        .map_err(|_| err)?;
                    s.continued = true;
                    s
                }
                None => return Err(err),
            },
        };
        out.push(sol);
    }
    Ok(out)
}

/// `|ω|`-weighted centroid of the cells touching `members`, from bilinear
/// interpolation of the shifted argument on a `SUB × SUB` subgrid.
fn refined_centroid(
    grid: &Grid,
    lookup: &HashMap<(i64, i64), usize>,
    members: &[usize],
    vortex: usize,
    level: &[f64],
    density: &impl Fn(usize, f64) -> f64,
) -> Option<Point> {
    const SUB: usize = 8;
    let h = grid.spacing();
    let mut cells = HashSet::new();
    for &k in members {
        let (i, j) = grid.lattice(k);
        for c in [(i - 1, j - 1), (i, j - 1), (i - 1, j), (i, j)] {
            cells.insert(c);
        }
    }
    let mut cells: Vec<_> = cells.into_iter().collect();
    cells.sort_unstable();
    let (mut mass, mut moment) = (0.0, Point::zeros());
    for (i, j) in cells {
        let corner = |a: i64, b: i64| lookup.get(&(i + a, j + b)).map(|&k| level[k]);
        let (Some(t00), Some(t10), Some(t01), Some(t11)) = (corner(0, 0), corner(1, 0), corner(0, 1), corner(1, 1)) else {
            continue;
        };
        for a in 0..SUB {
            for b in 0..SUB {
                let (s, r) = ((a as f64 + 0.5) / SUB as f64, (b as f64 + 0.5) / SUB as f64);
                let t = (1.0 - s) * (1.0 - r) * t00 + s * (1.0 - r) * t10 + (1.0 - s) * r * t01 + s * r * t11;
                let w = density(vortex, t);
                if w > 0.0 {
                    mass += w;
                    moment += w * Point::new((i as f64 + s) * h, (j as f64 + r) * h);
                }
            }
        }
    }
    (mass > 0.0).then(|| moment / mass)
}

fn extract_blobs(
    grid: &Grid,
    omega: &[f64],
    owner: &[usize],
    centers: &[Point],
    level: &[f64],
    density: impl Fn(usize, f64) -> f64,
) -> (Vec<Blob>, usize, bool) {
    let n = grid.len();
    let h2 = grid.spacing().powi(2);
    let mut label = vec![usize::MAX; n];
    let mut comps: Vec<Vec<usize>> = Vec::new();
    for s in 0..n {
        if omega[s] == 0.0 || label[s] != usize::MAX {
            continue;
        }
        let id = comps.len();
        let mut members = Vec::new();
        let mut queue = VecDeque::from([s]);
        label[s] = id;
        while let Some(k) = queue.pop_front() {
            members.push(k);
            for arm in grid.arms(k) {
                if let Arm::Node(m) = *arm {
                    if omega[m] != 0.0 && label[m] == usize::MAX {
                        label[m] = id;
                        queue.push_back(m);
                    }
                }
            }
        }
        comps.push(members);
    }
    let mut separated = true;
    let mut per: Vec<Vec<usize>> = vec![Vec::new(); centers.len()];
    let mut per_count = vec![0usize; centers.len()];
    for members in &comps {
        let first = members[0];
        let mixed = members
            .iter()
            .any(|&k| owner[k] != owner[first] || omega[k].signum() != omega[first].signum());
        if mixed {
            separated = false;
        }
        let c = nodal_centroid(grid, omega, members);
        // nearest center; ties go to the cell holding more of the component
        let overlap = |j: usize| members.iter().filter(|&&k| owner[k] == j).count();
        let mut best = 0;
        for i in 1..centers.len() {
            let (di, db) = ((c - centers[i]).norm(), (c - centers[best]).norm());
            if di < db - 1e-12 || ((di - db).abs() <= 1e-12 && overlap(i) > overlap(best)) {
                best = i;
            }
        }
        per[best].extend(members);
        per_count[best] += 1;
    }
    let lookup: HashMap<(i64, i64), usize> = (0..n).map(|k| (grid.lattice(k), k)).collect();
    let blobs = per
        .iter()
        .enumerate()
        .map(|(i, members)| {
            let circulation = h2 * members.iter().map(|&k| omega[k]).sum::<f64>();
            let centroid = if members.is_empty() {
                centers[i]
            } else {
                refined_centroid(grid, &lookup, members, i, level, &density)
                    .unwrap_or_else(|| nodal_centroid(grid, omega, members))
            };
            let mut diameter: f64 = 0.0;
            for (a, &ka) in members.iter().enumerate() {
                for &kb in &members[a + 1..] {
                    diameter = diameter.max((grid.position(ka) - grid.position(kb)).norm());
                }
            }
            Blob {
                vortex: i,
                centroid,
                circulation,
                support_diameter: diameter,
                nodes: members.len(),
                components: per_count[i],
            }
        })
        .collect();
    (blobs, comps.len(), separated)
}

fn nodal_centroid(grid: &Grid, omega: &[f64], members: &[usize]) -> Point {
    let mass: f64 = members.iter().map(|&k| omega[k].abs()).sum();
    members
        .iter()
        .fold(Point::zeros(), |acc, &k| acc + omega[k].abs() * grid.position(k))
        / mass
}

impl GridSolution {
    pub fn delta(&self) -> f64 {
        self.params.delta()
    }

    /// Discrete form of `(δ²/2)∫|∇u|² − Σᵢ∫Fᵢ(u − Γᵢ + 2πψ₀/|ln ε|)` for
    /// nodal values `v`, with arms to the boundary weighted by their length.
    pub fn energy(&self, v: &[f64]) -> f64 {
        let g = &*self.grid;
        let h = g.spacing();
        let lambda = self.params.log_eps();
        let delta2 = self.delta().powi(2);
        let mut dirichlet = 0.0;
        let mut potential = 0.0;
        for k in 0..g.len() {
            for arm in g.arms(k) {
                match *arm {
                    // each interior edge is seen from both ends
                    Arm::Node(m) => dirichlet += 0.5 * (v[k] - v[m]).powi(2),
                    Arm::Boundary(t) => dirichlet += v[k] * v[k] * h / t,
                }
            }
            if !self.gamma.is_empty() {
                let i = self.owner[k];
                let t = v[k] - self.gamma[i] + 2.0 * PI * self.flux.value(g.position(k)) / lambda;
                potential += primitive(self.gamma[i] > 0.0, t, self.params.p);
            }
        }
        0.5 * delta2 * dirichlet - h * h * potential
    }

    /// Nodes whose four neighbors are regular nodes as well.
    pub fn deep_nodes(&self) -> Vec<usize> {
        let g = &*self.grid;
        (0..g.len())
            .filter(|&k| {
                g.is_regular(k)
                    && g.arms(k).iter().all(|a| match *a {
                        Arm::Node(m) => g.is_regular(m),
                        Arm::Boundary(_) => false,
                    })
            })
            .collect()
    }

    /// Largest `|ω|` at nodes farther than `radius` from every center.
    pub fn max_vorticity_beyond(&self, radius: f64) -> f64 {
        (0..self.grid.len())
            .filter(|&k| {
                let x = self.grid.position(k);
                self.centers.iter().all(|c| (x - c).norm() > radius)
            })
            .map(|k| self.omega[k].abs())
            .fold(0.0, f64::max)
    }
}
