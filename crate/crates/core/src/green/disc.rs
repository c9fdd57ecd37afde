use std::f64::consts::PI;

use super::{GreenEval, RobinEval};
use crate::Point;

/// Dirichlet Green function of the unit disc via Kelvin inversion:
/// `g(x, y) = (1/4π) ln(1 - 2 x·y + |x|²|y|²)`.
#[derive(Debug, Clone, Default)]
pub struct DiscGreen;

impl DiscGreen {
    pub(crate) fn regular(&self, x: Point, y: Point) -> f64 {
        (1.0 - 2.0 * x.dot(&y) + x.norm_squared() * y.norm_squared()).ln() / (4.0 * PI)
    }

    /// Regular part, gradient in `x`, gradient in `y`.
    pub(crate) fn regular_with_grads(&self, x: Point, y: Point) -> (f64, Point, Point) {
        let (x2, y2) = (x.norm_squared(), y.norm_squared());
        let den = 1.0 - 2.0 * x.dot(&y) + x2 * y2;
        let gx = (2.0 * y2 * x - 2.0 * y) / (4.0 * PI * den);
        let gy = (2.0 * x2 * y - 2.0 * x) / (4.0 * PI * den);
        (den.ln() / (4.0 * PI), gx, gy)
    }

    pub(crate) fn green(&self, x: Point, y: Point) -> GreenEval {
        let r = x - y;
        let r2 = r.norm_squared();
        let (g, gx, gy) = self.regular_with_grads(x, y);
        GreenEval {
            value: g - r2.ln() / (4.0 * PI),
            grad_x: gx - r / (2.0 * PI * r2),
            grad_y: gy + r / (2.0 * PI * r2),
        }
    }

    pub(crate) fn robin(&self, x: Point) -> RobinEval {
        let s = 1.0 - x.norm_squared();
        RobinEval {
            value: s.ln() / (2.0 * PI),
            grad: -x / (PI * s),
        }
    }
}
