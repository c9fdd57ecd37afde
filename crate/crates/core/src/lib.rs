//! Point-vortex equilibria on bounded planar domains and their
//! desingularization into steady Euler flows.

pub mod domain;
pub mod dynamics;
pub mod desing;
pub mod equilibrium;
pub mod error;
pub mod green;
pub mod hamiltonian;
pub mod hypotheses;

pub use domain::{BoundaryFrame, Domain, Polygon, Shape};
pub use error::{Error, Result};
pub use green::{GreenBackend, GreenEval, RobinEval};
pub use hamiltonian::{Configuration, HamiltonianModel, HarmonicTerm, Strengths};

pub type Point = nalgebra::Vector2<f64>;
