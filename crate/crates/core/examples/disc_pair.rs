//! Counter-rotating pair in the unit disc: equilibrium, a short simulation
//! from it, and the desingularized steady flow.

use vortex_core::desing::{solve_steady_state, DesingParams};
use vortex_core::dynamics::{integrate, Scheme};
use vortex_core::equilibrium::{find_equilibrium_n2, N2Params};
use vortex_core::{GreenBackend, HamiltonianModel, Strengths};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let m = HamiltonianModel::new(GreenBackend::disc(), Strengths::new(vec![1.0, -1.0])?);
    let eq = find_equilibrium_n2(&m, &N2Params::default())?.best;
    let far = eq.x.points()[0];
    let x = eq.x.rotated(-far.y.atan2(far.x));
    let q = x.points()[0];
    println!("equilibrium at ±({:.12}, {:.12}), H = {:.12}, |∇H| = {:.2e}", q.x, q.y, eq.value, eq.residual);

    let tr = integrate(&m, &x, 1e-3, 10.0, Scheme::ImplicitMidpoint, 1000)?;
    let p = tr.last().x.points()[0];
    println!("after t = 10 the first vortex sits at ({:.12}, {:.12})", p.x, p.y);

    for eps in [0.1, 0.05] {
        let sol = solve_steady_state(&m, &x, &DesingParams::new(eps, 1.0 / 128.0)?)?;
        for b in &sol.blobs {
            println!(
                "ε = {eps}: blob at ({:.5}, {:.5}), circulation {:.4}, diameter {:.4}",
                b.centroid.x, b.centroid.y, b.circulation, b.support_diameter
            );
        }
    }
    Ok(())
}
