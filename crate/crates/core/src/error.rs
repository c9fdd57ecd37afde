use thiserror::Error;

use crate::Point;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point ({x}, {y}) is not inside the domain", x = .0.x, y = .0.y)]
    OutsideDomain(Point),

    #[error("point ({x}, {y}) is outside the boundary collar (distance {dist:.3e}, collar width {width:.3e})", x = .point.x, y = .point.y)]
    OutsideCollar { point: Point, dist: f64, width: f64 },

    #[error("coincident points: separation {0:.3e} is below the guard")]
    Coincident(f64),

    #[error("invalid domain geometry: {0}")]
    Geometry(String),

    #[error("invalid vortex strengths: {0}")]
    Strengths(String),

    #[error("arity error: {0}")]
    Arity(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("unsupported backend/domain combination: {0}")]
    Unsupported(String),

    #[error("degenerate boundary of the flow region: |grad Phi| = {0:.3e}")]
    DegenerateBoundary(f64),

    #[error("no equilibrium candidate: {0}")]
    NoCandidate(String),

    #[error("Newton refinement failed: {reason} (residual {residual:.3e} after {iterations} iterations)")]
    Refinement {
        reason: String,
        residual: f64,
        iterations: usize,
    },

    #[error("region calibration failed: {0}")]
    Calibration(String),

    #[error("radial profile: {0}")]
    Profile(String),

    #[error("linear solver failure: {0}")]
    LinearSolver(String),

    #[error("nonlinear solver did not converge: {0}")]
    Convergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;
