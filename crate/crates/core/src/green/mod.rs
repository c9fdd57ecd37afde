//! Green function `G = g − (1/2π) ln|x − y|`, its regular part `g` and the
//! Robin function `h(x) = g(x, x)`, with gradients, for three backends.

mod annulus;
mod bem;
pub mod contracts;
mod disc;

use std::f64::consts::PI;
use std::sync::Arc;

pub use annulus::AnnulusGreen;
pub use bem::BemGreen;
pub use contracts::{
    check_contracts, cross_validate, robin_sweep, ContractCheck, ContractReport, CrossValidation,
    SweepSample,
};
pub use disc::DiscGreen;

use crate::domain::{Domain, Shape};
use crate::error::{Error, Result};
use crate::Point;

/// Pairs closer than this are treated as coincident.
pub const SEPARATION_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenEval {
    pub value: f64,
    /// Gradient in the first argument.
    pub grad_x: Point,
    /// Gradient in the second argument.
    pub grad_y: Point,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobinEval {
    pub value: f64,
    pub grad: Point,
}

#[derive(Debug, Clone)]
pub enum Kernel {
    DiscClosedForm(DiscGreen),
    AnnulusImageSeries(AnnulusGreen),
    BemSolver(Arc<BemGreen>),
}

#[derive(Debug, Clone)]
pub struct GreenBackend {
    domain: Domain,
    kernel: Kernel,
}

impl GreenBackend {
    pub fn disc() -> Self {
        Self {
            domain: Domain::unit_disc(),
            kernel: Kernel::DiscClosedForm(DiscGreen),
        }
    }

    pub fn annulus(inner_radius: f64) -> Result<Self> {
        let domain = Domain::annulus(inner_radius)?;
        Ok(Self {
            domain,
            kernel: Kernel::AnnulusImageSeries(AnnulusGreen::new(inner_radius)),
        })
    }

    /// Annulus backend with an explicit number of image pairs.
    pub fn annulus_truncated(inner_radius: f64, truncation: usize) -> Result<Self> {
        if truncation == 0 {
            return Err(Error::Parameter("truncation must be positive".into()));
        }
        let domain = Domain::annulus(inner_radius)?;
        Ok(Self {
            domain,
            kernel: Kernel::AnnulusImageSeries(AnnulusGreen::with_truncation(
                inner_radius,
                truncation,
            )),
        })
    }

    pub fn bem(domain: Domain, panel_count: usize, quadrature_order: usize) -> Result<Self> {
        let solver = BemGreen::new(&domain, panel_count, quadrature_order)?;
        Ok(Self {
            domain,
            kernel: Kernel::BemSolver(Arc::new(solver)),
        })
    }

    /// The natural backend for a domain: closed forms where available.
    pub fn for_domain(domain: Domain) -> Result<Self> {
        match domain.shape() {
            Shape::UnitDisc => Ok(Self {
                domain,
                kernel: Kernel::DiscClosedForm(DiscGreen),
            }),
            Shape::Annulus { inner_radius } => {
                let k = AnnulusGreen::new(*inner_radius);
                Ok(Self {
                    domain,
                    kernel: Kernel::AnnulusImageSeries(k),
                })
            }
            Shape::Panels(p) => {
                let n = p.len().max(64);
                Self::bem(domain, n, 4)
            }
        }
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn name(&self) -> &'static str {
        match self.kernel {
            Kernel::DiscClosedForm(_) => "disc",
            Kernel::AnnulusImageSeries(_) => "annulus",
            Kernel::BemSolver(_) => "bem",
        }
    }

    pub fn is_analytic(&self) -> bool {
        !matches!(self.kernel, Kernel::BemSolver(_))
    }

    /// Distance from the boundary inside which the backend loses accuracy:
    /// sources closer than a few node spacings produce unresolved densities.
    pub fn near_field_distance(&self) -> f64 {
        match &self.kernel {
            Kernel::BemSolver(b) => 4.0 * b.node_spacing(),
            _ => 0.0,
        }
    }

    fn interior(&self, x: Point) -> Result<()> {
        if self.domain.contains(x) {
            Ok(())
        } else {
            Err(Error::OutsideDomain(x))
        }
    }

    fn reg(&self, x: Point, y: Point) -> f64 {
        match &self.kernel {
            Kernel::DiscClosedForm(k) => k.regular(x, y),
            Kernel::AnnulusImageSeries(k) => k.regular(x, y),
            Kernel::BemSolver(k) => k.regular(x, y),
        }
    }

    fn reg_grads(&self, x: Point, y: Point) -> (f64, Point, Point) {
        match &self.kernel {
            Kernel::DiscClosedForm(k) => k.regular_with_grads(x, y),
            Kernel::AnnulusImageSeries(k) => k.regular_with_grads(x, y),
            Kernel::BemSolver(k) => k.regular_with_grads(x, y),
        }
    }

    /// `G(x, y)` with both gradients.
    pub fn eval_g(&self, x: Point, y: Point) -> Result<GreenEval> {
        self.interior(x)?;
        self.interior(y)?;
        let r = x - y;
        let sep = r.norm();
        if sep <= SEPARATION_GUARD {
            return Err(Error::Coincident(sep));
        }
        Ok(match &self.kernel {
            Kernel::DiscClosedForm(k) => k.green(x, y),
            Kernel::AnnulusImageSeries(k) => k.green(x, y),
            Kernel::BemSolver(k) => {
                let (g, gx, gy) = k.regular_with_grads(x, y);
                let r2 = sep * sep;
                GreenEval {
                    value: g - r2.ln() / (4.0 * PI),
                    grad_x: gx - r / (2.0 * PI * r2),
                    grad_y: gy + r / (2.0 * PI * r2),
                }
            }
        })
    }

    /// Regular part `g(x, y)`; defined on the diagonal as well.
    pub fn eval_regular(&self, x: Point, y: Point) -> Result<f64> {
        self.interior(x)?;
        self.interior(y)?;
        Ok(self.reg(x, y))
    }

    /// Regular part with its gradients in `x` and `y`.
    pub fn eval_regular_grads(&self, x: Point, y: Point) -> Result<(f64, Point, Point)> {
        self.interior(x)?;
        self.interior(y)?;
        Ok(self.reg_grads(x, y))
    }

    pub fn eval_robin(&self, x: Point) -> Result<RobinEval> {
        self.interior(x)?;
        Ok(match &self.kernel {
            Kernel::DiscClosedForm(k) => k.robin(x),
            Kernel::AnnulusImageSeries(k) => k.robin(x),
            Kernel::BemSolver(k) => {
                let (g, gx, gy) = k.regular_with_grads(x, x);
                RobinEval {
                    value: g,
                    grad: gx + gy,
                }
            }
        })
    }

    /// `ψ(x, y) = g(x, y) − (1/2π) ln|x̄ − y|` with the normal reflection `x̄`.
    pub fn psi_diagnostic(&self, x: Point, y: Point) -> Result<f64> {
        let fx = self.domain.boundary_frame(x)?;
        self.domain.boundary_frame(y)?;
        let sep = (x - y).norm();
        if sep <= SEPARATION_GUARD {
            return Err(Error::Coincident(sep));
        }
        Ok(self.reg(x, y) - (fx.reflection - y).norm().ln() / (2.0 * PI))
    }
}
