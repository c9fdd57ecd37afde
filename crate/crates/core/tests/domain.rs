use std::f64::consts::PI;

use proptest::prelude::*;
use vortex_core::{Domain, Error, Point, Polygon};

fn disc_panels(n: usize) -> Domain {
    Domain::panels(Polygon::regular(n, Point::zeros(), 1.0).unwrap().vertices().to_vec()).unwrap()
}

fn polar(r: f64, t: f64) -> Point {
    Point::new(r * t.cos(), r * t.sin())
}

#[test]
fn spec_examples() {
    let d = Domain::unit_disc();
    assert_eq!(d.dist_to_boundary(Point::zeros()).unwrap(), 1.0);
    assert!((d.dist_to_boundary(Point::new(0.9, 0.0)).unwrap() - 0.1).abs() < 1e-15);
    let a = Domain::annulus(0.5).unwrap();
    assert!((a.dist_to_boundary(Point::new(0.6, 0.0)).unwrap() - 0.1).abs() < 1e-15);
    assert!(d.contains(Point::new(0.5, 0.5)));
    assert!(!d.contains(Point::new(1.0, 0.0)));
    assert!(!a.contains(Point::new(0.25, 0.0)));
    assert!(matches!(d.dist_to_boundary(Point::new(1.5, 0.0)), Err(Error::OutsideDomain(_))));

    let f = d.boundary_frame(Point::new(0.0, -0.95)).unwrap();
    assert!((f.dist - 0.05).abs() < 1e-15);
    assert!((f.normal - Point::new(0.0, 1.0)).norm() < 1e-15);
    assert!((f.reflection - Point::new(0.0, -1.05)).norm() < 1e-15);
    assert!(matches!(d.boundary_frame(Point::new(0.1, 0.0)), Err(Error::OutsideCollar { .. })));
}

#[test]
fn default_collar_widths() {
    assert!((Domain::unit_disc().strip_width() - 0.2).abs() < 1e-15);
    assert!((Domain::annulus(0.5).unwrap().strip_width() - 0.05).abs() < 1e-15);
}

#[test]
fn fine_panel_disc_reproduces_the_disc_frame() {
    let p = disc_panels(512);
    let d = Domain::unit_disc();
    for t in [0.0, 0.3, 2.0, 4.5] {
        let x = polar(0.9, t);
        let (fp, fd) = (p.boundary_frame(x).unwrap(), d.boundary_frame(x).unwrap());
        assert!((fp.dist - fd.dist).abs() < 1e-3);
        assert!((fp.normal - fd.normal).norm() < 1e-3);
        assert!((fp.reflection - fd.reflection).norm() < 1e-3);
    }
}

fn collar_point(domain: &Domain) -> impl Strategy<Value = Point> {
    let d = domain.clone();
    let w = d.strip_width();
    (0.0..2.0 * PI, 0.01..0.99f64, any::<bool>()).prop_map(move |(t, s, inner)| match d.shape() {
        vortex_core::Shape::Annulus { inner_radius } if inner => polar(inner_radius + s * w, t),
        _ => polar(1.0 - s * w, t),
    })
}

fn check_frame(d: &Domain, x: Point, tol: f64) -> Result<(), TestCaseError> {
    let f = d.boundary_frame(x).unwrap();
    prop_assert!((f.normal.norm() - 1.0).abs() < 1e-12);
    prop_assert!((f.projection - (x - f.dist * f.normal)).norm() < 1e-12);
    prop_assert!((f.reflection - (x - 2.0 * f.dist * f.normal)).norm() < 1e-12);
    prop_assert!((f.projection - 0.5 * (x + f.reflection)).norm() < 1e-12);
    prop_assert!(!d.contains(f.reflection));
    // the reflected point reflects back across the same boundary point
    let back = 2.0 * f.projection - f.reflection;
    prop_assert!((back - x).norm() < tol);
    let nu = (x - f.reflection) / (x - f.reflection).norm();
    prop_assert!((nu - f.normal).norm() < tol);
    Ok(())
}

proptest! {
    #[test]
    fn disc_frames_are_involutive(x in collar_point(&Domain::unit_disc())) {
        check_frame(&Domain::unit_disc(), x, 1e-10)?;
    }

    #[test]
    fn annulus_frames_are_involutive(x in collar_point(&Domain::annulus(0.5).unwrap())) {
        check_frame(&Domain::annulus(0.5).unwrap(), x, 1e-10)?;
    }

    #[test]
    fn panel_frames_are_involutive(t in 0.0..2.0 * PI, s in 0.05..0.95f64) {
        let d = disc_panels(256);
        let x = polar(1.0 - s * d.strip_width(), t) * (PI / 256.0).cos();
        prop_assume!(d.contains(x));
        check_frame(&d, x, 1e-6)?;
    }

    #[test]
    fn distance_is_one_lipschitz(r1 in 0.0..0.999f64, t1 in 0.0..2.0 * PI, r2 in 0.0..0.999f64, t2 in 0.0..2.0 * PI) {
        for d in [Domain::unit_disc(), disc_panels(64)] {
            let (x, y) = (polar(r1, t1) * 0.99, polar(r2, t2) * 0.99);
            prop_assume!(d.contains(x) && d.contains(y));
            let gap = (d.dist_to_boundary(x).unwrap() - d.dist_to_boundary(y).unwrap()).abs();
            prop_assert!(gap <= (x - y).norm() + 1e-12);
        }
    }

    #[test]
    fn annulus_distance_is_one_lipschitz(r1 in 0.501..0.999f64, t1 in 0.0..2.0 * PI, r2 in 0.501..0.999f64, t2 in 0.0..2.0 * PI) {
        let d = Domain::annulus(0.5).unwrap();
        let (x, y) = (polar(r1, t1), polar(r2, t2));
        let gap = (d.dist_to_boundary(x).unwrap() - d.dist_to_boundary(y).unwrap()).abs();
        prop_assert!(gap <= (x - y).norm() + 1e-12);
    }
}
