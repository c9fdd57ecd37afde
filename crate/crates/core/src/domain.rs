//! Bounded planar domains and the boundary-collar geometry: distance to the
//! boundary, nearest boundary point, interior normal and the normal
//! reflection `x̄ = x - 2 d ν`.
//!
//! The normal reflection used here is not the Kelvin inversion used by the
//! disc Green function; the two are kept apart on purpose.

use std::f64::consts::PI;

use rand::Rng;

use crate::error::{Error, Result};
use crate::Point;

/// Points closer than this to the boundary count as lying on it.
const ON_BOUNDARY: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    /// `|x| < 1`.
    UnitDisc,
    /// `inner_radius < |x| < 1`.
    Annulus { inner_radius: f64 },
    /// Interior of a closed, simple, counter-clockwise polyline.
    Panels(Polygon),
}

/// Closed polyline; the last vertex connects back to the first.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    vertices: Vec<Point>,
}

impl Polygon {
    pub fn new(vertices: Vec<Point>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::Geometry(format!(
                "a boundary polyline needs at least 3 points, got {}",
                vertices.len()
            )));
        }
        let mut vertices = vertices;
        // tolerate an explicitly repeated closing point
        if (vertices[0] - vertices[vertices.len() - 1]).norm() <= ON_BOUNDARY {
            vertices.pop();
        }
        let poly = Self { vertices };
        for (i, (a, b)) in poly.segments().enumerate() {
            if (b - a).norm() <= ON_BOUNDARY {
                return Err(Error::Geometry(format!("repeated boundary point at index {i}")));
            }
        }
        if poly.signed_area() <= 0.0 {
            return Err(Error::Geometry(
                "boundary polyline must be positively (counter-clockwise) oriented".into(),
            ));
        }
        if let Some((i, j)) = poly.first_self_intersection() {
            return Err(Error::Geometry(format!(
                "boundary polyline self-intersects (segments {i} and {j})"
            )));
        }
        Ok(poly)
    }

    /// Regular `n`-gon inscribed in the circle of radius `radius` around `center`.
    pub fn regular(n: usize, center: Point, radius: f64) -> Result<Self> {
        let pts = (0..n)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / n as f64;
                center + radius * Point::new(t.cos(), t.sin())
            })
            .collect();
        Self::new(pts)
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn segments(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn signed_area(&self) -> f64 {
        0.5 * self.segments().map(|(a, b)| a.x * b.y - a.y * b.x).sum::<f64>()
    }

    fn first_self_intersection(&self) -> Option<(usize, usize)> {
        let n = self.vertices.len();
        let segs: Vec<_> = self.segments().collect();
        for i in 0..n {
            for j in (i + 2)..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                if segments_intersect(segs[i], segs[j]) {
                    return Some((i, j));
                }
            }
        }
        None
    }

    /// Nearest point on the polyline and its distance.
    fn nearest(&self, x: Point) -> (Point, f64) {
        let (_, _, p, d) = self.nearest_on_segment(x);
        (p, d)
    }

    /// Segment index, segment parameter, nearest point and distance.
    fn nearest_on_segment(&self, x: Point) -> (usize, f64, Point, f64) {
        let mut best = (0, 0.0, self.vertices[0], f64::INFINITY);
        for (i, (a, b)) in self.segments().enumerate() {
            let e = b - a;
            let t = ((x - a).dot(&e) / e.norm_squared()).clamp(0.0, 1.0);
            let p = a + t * e;
            let d = (x - p).norm();
            if d < best.3 {
                best = (i, t, p, d);
            }
        }
        best
    }

    /// Inward normal of segment `i`.
    fn panel_normal(&self, i: usize) -> Point {
        let n = self.vertices.len();
        let e = self.vertices[(i + 1) % n] - self.vertices[i];
        Point::new(-e.y, e.x) / e.norm()
    }

    /// Average of the adjacent panel normals at vertex `j`.
    fn vertex_normal(&self, j: usize) -> Point {
        let n = self.vertices.len();
        (self.panel_normal((j + n - 1) % n) + self.panel_normal(j)).normalize()
    }

    /// Inward normal blended linearly between vertex normals along the
    /// nearest panel.
    fn smooth_normal(&self, x: Point) -> (Point, f64) {
        let (i, t, _, d) = self.nearest_on_segment(x);
        let n = self.vertices.len();
        let nu = ((1.0 - t) * self.vertex_normal(i) + t * self.vertex_normal((i + 1) % n)).normalize();
        (nu, d)
    }

    fn winding_number(&self, x: Point) -> i32 {
        let mut wn = 0;
        for (a, b) in self.segments() {
            let side = cross(b - a, x - a);
            if a.y <= x.y {
                if b.y > x.y && side > 0.0 {
                    wn += 1;
                }
            } else if b.y <= x.y && side < 0.0 {
                wn -= 1;
            }
        }
        wn
    }

    fn ray_hit(&self, x: Point, dir: Point) -> Option<f64> {
        let mut best: Option<f64> = None;
        for (a, b) in self.segments() {
            let e = b - a;
            let denom = cross(dir, e);
            if denom.abs() < 1e-300 {
                continue;
            }
            let w = a - x;
            let t = cross(w, e) / denom;
            let s = cross(w, dir) / denom;
            if t > 0.0 && (-1e-12..=1.0 + 1e-12).contains(&s) {
                best = Some(best.map_or(t, |b: f64| b.min(t)));
            }
        }
        best
    }
}

fn cross(a: Point, b: Point) -> f64 {
    a.x * b.y - a.y * b.x
}

fn segments_intersect((p1, p2): (Point, Point), (q1, q2): (Point, Point)) -> bool {
    let d1 = cross(q2 - q1, p1 - q1);
    let d2 = cross(q2 - q1, p2 - q1);
    let d3 = cross(p2 - p1, q1 - p1);
    let d4 = cross(p2 - p1, q2 - p1);
    (d1 * d2 <= 0.0) && (d3 * d4 <= 0.0) && !(d1 == 0.0 && d2 == 0.0 && d3 == 0.0 && d4 == 0.0)
}

/// Distance, projection, interior normal and reflection at a collar point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryFrame {
    pub dist: f64,
    pub projection: Point,
    pub normal: Point,
    pub reflection: Point,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    shape: Shape,
    strip_width: f64,
}

impl Domain {
    pub fn unit_disc() -> Self {
        Self {
            shape: Shape::UnitDisc,
            strip_width: 0.2,
        }
    }

    pub fn annulus(inner_radius: f64) -> Result<Self> {
        if !(inner_radius > 0.0 && inner_radius < 1.0) {
            return Err(Error::Geometry(format!(
                "annulus inner radius must lie in (0, 1), got {inner_radius}"
            )));
        }
        let inradius = 0.5 * (1.0 - inner_radius);
        Ok(Self {
            shape: Shape::Annulus { inner_radius },
            strip_width: 0.2 * inradius,
        })
    }

    /// Polygonal domain; the collar width is estimated from the geometry.
    pub fn panels(vertices: Vec<Point>) -> Result<Self> {
        let poly = Polygon::new(vertices)?;
        let strip_width = 0.5 * unique_projection_width(&poly);
        if strip_width <= 0.0 {
            return Err(Error::Geometry("could not establish a boundary collar".into()));
        }
        Ok(Self {
            shape: Shape::Panels(poly),
            strip_width,
        })
    }

    pub fn with_strip_width(mut self, strip_width: f64) -> Result<Self> {
        if !(strip_width > 0.0 && strip_width < self.inradius()) {
            return Err(Error::Geometry(format!(
                "collar width {strip_width} must lie in (0, inradius)"
            )));
        }
        self.strip_width = strip_width;
        Ok(self)
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    /// Collar width ε₀.
    pub fn strip_width(&self) -> f64 {
        self.strip_width
    }

    /// Domains whose Green function is invariant under rotations about 0.
    pub fn is_rotation_invariant(&self) -> bool {
        !matches!(self.shape, Shape::Panels(_))
    }

    pub fn inradius(&self) -> f64 {
        match &self.shape {
            Shape::UnitDisc => 1.0,
            Shape::Annulus { inner_radius } => 0.5 * (1.0 - inner_radius),
            Shape::Panels(poly) => {
                let (lo, hi) = self.bounding_box();
                let m = 96;
                let mut best = 0.0f64;
                for i in 0..=m {
                    for j in 0..=m {
                        let x = Point::new(
                            lo.x + (hi.x - lo.x) * i as f64 / m as f64,
                            lo.y + (hi.y - lo.y) * j as f64 / m as f64,
                        );
                        if poly.winding_number(x) != 0 {
                            best = best.max(poly.nearest(x).1);
                        }
                    }
                }
                best
            }
        }
    }

    pub fn diameter(&self) -> f64 {
        match &self.shape {
            Shape::UnitDisc | Shape::Annulus { .. } => 2.0,
            Shape::Panels(poly) => {
                let v = poly.vertices();
                let mut best = 0.0f64;
                for (i, a) in v.iter().enumerate() {
                    for b in &v[i + 1..] {
                        best = best.max((a - b).norm());
                    }
                }
                best
            }
        }
    }

    pub fn bounding_box(&self) -> (Point, Point) {
        match &self.shape {
            Shape::UnitDisc | Shape::Annulus { .. } => (Point::new(-1.0, -1.0), Point::new(1.0, 1.0)),
            Shape::Panels(poly) => {
                let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
                let mut hi = -lo;
                for v in poly.vertices() {
                    lo = lo.inf(v);
                    hi = hi.sup(v);
                }
                (lo, hi)
            }
        }
    }

    /// Strict interior membership.
    pub fn contains(&self, x: Point) -> bool {
        if !(x.x.is_finite() && x.y.is_finite()) {
            return false;
        }
        match &self.shape {
            Shape::UnitDisc => x.norm_squared() < 1.0,
            Shape::Annulus { inner_radius } => {
                let r2 = x.norm_squared();
                r2 < 1.0 && r2 > inner_radius * inner_radius
            }
            Shape::Panels(poly) => poly.winding_number(x) != 0 && poly.nearest(x).1 > 0.0,
        }
    }

    /// Unsigned distance to the boundary curve, without a membership check.
    fn raw_distance(&self, x: Point) -> f64 {
        match &self.shape {
            Shape::UnitDisc => (1.0 - x.norm()).abs(),
            Shape::Annulus { inner_radius } => {
                let r = x.norm();
                (1.0 - r).abs().min((r - inner_radius).abs())
            }
            Shape::Panels(poly) => poly.nearest(x).1,
        }
    }

    pub fn dist_to_boundary(&self, x: Point) -> Result<f64> {
        let d = self.raw_distance(x);
        if self.contains(x) || d <= ON_BOUNDARY {
            Ok(if self.contains(x) { d } else { 0.0 })
        } else {
            Err(Error::OutsideDomain(x))
        }
    }

    pub fn boundary_frame(&self, x: Point) -> Result<BoundaryFrame> {
        if !self.contains(x) {
            return Err(Error::OutsideDomain(x));
        }
        let (dist, projection, normal) = match &self.shape {
            Shape::UnitDisc => {
                let r = x.norm();
                let radial = x / r;
                (1.0 - r, radial, -radial)
            }
            Shape::Annulus { inner_radius } => {
                let r = x.norm();
                let radial = x / r;
                if 1.0 - r <= r - inner_radius {
                    (1.0 - r, radial, -radial)
                } else {
                    (r - inner_radius, *inner_radius * radial, radial)
                }
            }
            Shape::Panels(poly) => {
                let (nu, d) = poly.smooth_normal(x);
                (d, x - d * nu, nu)
            }
        };
        if !(dist > 0.0 && dist < self.strip_width) {
            return Err(Error::OutsideCollar {
                point: x,
                dist,
                width: self.strip_width,
            });
        }
        Ok(BoundaryFrame {
            dist,
            projection,
            normal,
            reflection: x - 2.0 * dist * normal,
        })
    }

    /// Distance from `x` along the unit direction `dir` to the first boundary
    /// crossing, if any.
    pub fn ray_to_boundary(&self, x: Point, dir: Point) -> Option<f64> {
        match &self.shape {
            Shape::UnitDisc => ray_circle(x, dir, 1.0),
            Shape::Annulus { inner_radius } => {
                let outer = ray_circle(x, dir, 1.0);
                let inner = ray_circle(x, dir, *inner_radius);
                match (outer, inner) {
                    (Some(a), Some(b)) => Some(a.min(b)),
                    (a, b) => a.or(b),
                }
            }
            Shape::Panels(poly) => poly.ray_hit(x, dir),
        }
    }

    /// Uniform random interior point at least `margin` away from the boundary.
    pub fn sample_interior<R: Rng + ?Sized>(&self, rng: &mut R, margin: f64) -> Point {
        let (lo, hi) = self.bounding_box();
        loop {
            let x = Point::new(rng.gen_range(lo.x..hi.x), rng.gen_range(lo.y..hi.y));
            if self.contains(x) && self.raw_distance(x) >= margin {
                return x;
            }
        }
    }

    /// `n` points on the outer boundary curve, counter-clockwise.
    pub fn boundary_samples(&self, n: usize) -> Result<Vec<Point>> {
        match &self.shape {
            Shape::UnitDisc => Ok((0..n)
                .map(|k| {
                    let t = 2.0 * PI * k as f64 / n as f64;
                    Point::new(t.cos(), t.sin())
                })
                .collect()),
            Shape::Panels(poly) => Ok(poly.vertices().to_vec()),
            Shape::Annulus { .. } => Err(Error::Unsupported(
                "the annulus has two boundary components".into(),
            )),
        }
    }
}

/// Smallest positive `t` with `|x + t dir| = radius`, for `|dir| = 1`.
fn ray_circle(x: Point, dir: Point, radius: f64) -> Option<f64> {
    let b = x.dot(&dir);
    let c = x.norm_squared() - radius * radius;
    let disc = b * b - c;
    if disc < 0.0 {
        return None;
    }
    let s = disc.sqrt();
    // stable roots of t² + 2bt + c = 0
    let q = if b > 0.0 { -b - s } else { -b + s };
    let mut roots = [q, if q != 0.0 { c / q } else { 0.0 }];
    roots.sort_by(f64::total_cmp);
    roots.into_iter().find(|&t| t > 1e-15)
}

/// Largest inward offset along panel-midpoint normals for which the midpoint
/// remains the nearest boundary point (minimum over panels).
fn unique_projection_width(poly: &Polygon) -> f64 {
    let mut width = f64::INFINITY;
    for (a, b) in poly.segments() {
        let e = b - a;
        let normal = Point::new(-e.y, e.x) / e.norm();
        let mid = 0.5 * (a + b);
        let unique = |t: f64| {
            let x = mid + t * normal;
            poly.winding_number(x) != 0 && poly.nearest(x).1 >= t * (1.0 - 1e-9)
        };
        let (mut lo, mut hi) = (0.0, 1.0);
        while unique(hi) && hi < 1e6 {
            lo = hi;
            hi *= 2.0;
        }
        for _ in 0..50 {
            let mid_t = 0.5 * (lo + hi);
            if unique(mid_t) {
                lo = mid_t;
            } else {
                hi = mid_t;
            }
        }
        width = width.min(lo);
    }
    width
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn disc_distances() {
        let d = Domain::unit_disc();
        assert_eq!(d.dist_to_boundary(Point::new(0.0, 0.0)).unwrap(), 1.0);
        assert_abs_diff_eq!(d.dist_to_boundary(Point::new(0.9, 0.0)).unwrap(), 0.1, epsilon = 1e-15);
        assert!(matches!(
            d.dist_to_boundary(Point::new(1.5, 0.0)),
            Err(Error::OutsideDomain(_))
        ));
    }

    #[test]
    fn annulus_distance_to_inner_circle() {
        let d = Domain::annulus(0.5).unwrap();
        assert_abs_diff_eq!(d.dist_to_boundary(Point::new(0.6, 0.0)).unwrap(), 0.1, epsilon = 1e-15);
        assert!(!d.contains(Point::new(0.25, 0.0)));
        assert!(Domain::annulus(1.2).is_err());
    }

    #[test]
    fn membership() {
        let d = Domain::unit_disc();
        assert!(d.contains(Point::new(0.5, 0.5)));
        assert!(!d.contains(Point::new(1.0, 0.0)));
    }

    #[test]
    fn disc_frames() {
        let d = Domain::unit_disc();
        let f = d.boundary_frame(Point::new(0.9, 0.0)).unwrap();
        assert_abs_diff_eq!(f.dist, 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(f.projection, Point::new(1.0, 0.0), epsilon = 1e-15);
        assert_abs_diff_eq!(f.normal, Point::new(-1.0, 0.0), epsilon = 1e-15);
        assert_abs_diff_eq!(f.reflection, Point::new(1.1, 0.0), epsilon = 1e-14);

        let f = d.boundary_frame(Point::new(0.0, -0.95)).unwrap();
        assert_abs_diff_eq!(f.dist, 0.05, epsilon = 1e-15);
        assert_abs_diff_eq!(f.normal, Point::new(0.0, 1.0), epsilon = 1e-15);
        assert_abs_diff_eq!(f.reflection, Point::new(0.0, -1.05), epsilon = 1e-14);

        assert!(matches!(
            d.boundary_frame(Point::new(0.1, 0.0)),
            Err(Error::OutsideCollar { .. })
        ));
    }

    #[test]
    fn panel_frame_matches_disc() {
        let poly = Polygon::regular(512, Point::zeros(), 1.0).unwrap();
        let d = Domain::panels(poly.vertices().to_vec()).unwrap();
        let x = Point::new(0.9, 0.0);
        let f = d.boundary_frame(x).unwrap();
        let g = Domain::unit_disc().boundary_frame(x).unwrap();
        assert!((f.dist - g.dist).abs() < 1e-3);
        assert!((f.normal - g.normal).norm() < 1e-3);
        assert!((f.projection - g.projection).norm() < 1e-3);
        assert!((f.reflection - g.reflection).norm() < 1e-3);
        // off-vertex point as well
        let x = Point::new(0.0, 0.93);
        let f = d.boundary_frame(x).unwrap();
        let g = Domain::unit_disc().boundary_frame(x).unwrap();
        assert!((f.dist - g.dist).abs() < 1e-3);
        assert!((f.normal - g.normal).norm() < 1e-3);
    }

    #[test]
    fn panel_collar_width_for_square() {
        let sq = vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ];
        let d = Domain::panels(sq).unwrap();
        // midpoint normals stay nearest up to the centre, 0.5
        assert_abs_diff_eq!(d.strip_width(), 0.25, epsilon = 1e-6);
        assert!(d.contains(Point::new(0.5, 0.5)));
        assert!(!d.contains(Point::new(1.5, 0.5)));
    }

    #[test]
    fn rejects_bad_polylines() {
        let cw = vec![Point::new(0.0, 0.0), Point::new(0.0, 1.0), Point::new(1.0, 1.0), Point::new(1.0, 0.0)];
        assert!(Domain::panels(cw).is_err());
        let bowtie = vec![Point::new(0.0, 0.0), Point::new(1.0, 1.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)];
        assert!(Domain::panels(bowtie).is_err());
    }

    #[test]
    fn rays_hit_the_boundary() {
        let d = Domain::annulus(0.5).unwrap();
        let t = d.ray_to_boundary(Point::new(0.75, 0.0), Point::new(-1.0, 0.0)).unwrap();
        assert_abs_diff_eq!(t, 0.25, epsilon = 1e-14);
        let t = d.ray_to_boundary(Point::new(0.75, 0.0), Point::new(1.0, 0.0)).unwrap();
        assert_abs_diff_eq!(t, 0.25, epsilon = 1e-14);
        let sq = Domain::panels(vec![
            Point::new(-1.0, -1.0),
            Point::new(1.0, -1.0),
            Point::new(1.0, 1.0),
            Point::new(-1.0, 1.0),
        ])
        .unwrap();
        let t = sq.ray_to_boundary(Point::new(0.25, 0.0), Point::new(1.0, 0.0)).unwrap();
        assert_abs_diff_eq!(t, 0.75, epsilon = 1e-14);
    }
}
