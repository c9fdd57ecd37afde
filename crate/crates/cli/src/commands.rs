//! The six subcommands.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use vortex_core::desing::{solve_sequence, GridSolution};
use vortex_core::dynamics::integrate;
use vortex_core::equilibrium::{find_equilibria, find_equilibrium_n2, Calibration, EquilibriumResult, LinkingCycle};
use vortex_core::green::contracts::{check_contracts, robin_sweep};
use vortex_core::hypotheses::{applicability, Theorem, Verdict, Witness};
use vortex_core::{Configuration, Point};

use crate::config::Run;
use crate::output::{num, nums, point, position_header, positions, record, Sink};
use crate::Failure;

/// Bound on `|h − (1/2π) ln 2d|` along the boundary sweeps.
pub const ROBIN_GAP_BOUND: f64 = 0.25;
/// Bound on `d·|∇h − ν/(2πd)|` at the smallest swept distance.
pub const ROBIN_GRADIENT_BOUND: f64 = 1e-2;
/// Relative tolerance of the finite-difference gradient checks.
pub const GRADIENT_TOL: f64 = 1e-6;
const FD_STEP: f64 = 1e-6;
const SWEEPS: usize = 8;

type Outcome = Result<(), Failure>;

fn sink(run: &Run) -> Sink {
    Sink {
        dir: run.output.clone(),
        hash: run.hash.clone(),
        seed: run.config.seed,
    }
}

fn verdict(v: Verdict) -> Value {
    Value::String(
        match v {
            Verdict::Holds => "holds",
            Verdict::Fails => "fails",
            Verdict::Boundary => "boundary",
        }
        .into(),
    )
}

fn witnesses(w: &[Witness]) -> Value {
    Value::Array(
        w.iter()
            .map(|w| {
                record([
                    ("indices", Value::Array(w.indices.iter().map(|&i| i.into()).collect())),
                    ("value", num(w.value)),
                    ("verdict", verdict(w.verdict)),
                ])
            })
            .collect(),
    )
}

pub fn check(run: &Run) -> Outcome {
    let r = applicability(run.model.strengths())?;
    let hyp1 = r.hyp1.as_ref().map_or(Value::Null, |h| {
        record([
            ("holds", h.holds.into()),
            ("adjacent", witnesses(&h.adjacent)),
            ("subsets", witnesses(&h.subsets)),
        ])
    });
    let hyp2 = r
        .hyp2
        .as_ref()
        .map_or(Value::Null, |(holds, w)| record([("holds", (*holds).into()), ("witnesses", witnesses(w))]));
    let body = record([
        ("n", r.n.into()),
        ("gamma", nums(&run.config.gamma)),
        ("applicable", r.applicable.to_string().into()),
        ("hyp1", hyp1),
        ("hyp2", hyp2),
        ("failures", Value::Array(r.failures.iter().map(|f| f.as_str().into()).collect())),
    ]);
    sink(run).json("check.json", "check", body)?;
    if r.applicable == Theorem::None {
        println!("no existence result applies");
        for f in &r.failures {
            println!("  {f}");
        }
        Err(Failure::Unmet("hypotheses fail".into()))
    } else {
        println!("{} applicable", r.applicable);
        Ok(())
    }
}

fn sample_points(run: &Run) -> Vec<Point> {
    let g = &run.config.green;
    match &g.points {
        Some(p) => p.iter().map(|p| Point::new(p[0], p[1])).collect(),
        None => {
            let dom = run.model.backend().domain();
            let mut rng = ChaCha8Rng::seed_from_u64(run.config.seed);
            (0..g.samples)
                .map(|_| dom.sample_interior(&mut rng, g.margin * dom.inradius()))
                .collect()
        }
    }
}

pub fn green(run: &Run) -> Outcome {
    let b = run.model.backend();
    let pts = sample_points(run);
    let mut pairs = Vec::new();
    for (i, &x) in pts.iter().enumerate() {
        for (j, &y) in pts.iter().enumerate() {
            if i != j {
                let g = b.eval_g(x, y)?;
                pairs.push(vec![x.x, x.y, y.x, y.y, g.value, g.grad_x.x, g.grad_x.y, g.grad_y.x, g.grad_y.y]);
            }
        }
    }
    let robin = pts
        .iter()
        .map(|&x| b.eval_robin(x).map(|h| vec![x.x, x.y, h.value, h.grad.x, h.grad.y]))
        .collect::<Result<Vec<_>, _>>()?;
    let s = sink(run);
    let head = |c: &[&str]| c.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    s.csv(
        "green.csv",
        &head(&["x1", "x2", "y1", "y2", "G", "dG_dx1", "dG_dx2", "dG_dy1", "dG_dy2"]),
        pairs,
    )?;
    s.csv("robin.csv", &head(&["x1", "x2", "h", "dh_dx1", "dh_dx2"]), robin)?;
    println!("{} points on the {} backend", pts.len(), b.name());
    Ok(())
}

fn result_record(r: &EquilibriumResult, gamma: &[f64]) -> Value {
    record([
        ("positions", positions(&r.x)),
        ("gamma", nums(gamma)),
        ("residual", num(r.residual)),
        ("H", num(r.value)),
        ("phi", num(r.phi)),
        ("phi_margin", r.phi_margin.map_or(Value::Null, num)),
        ("hessian_eigs", nums(&r.hessian_eigs)),
        ("iterations", r.iterations.into()),
    ])
}

fn calibration_record(c: &Calibration) -> Value {
    record([
        ("a", num(c.a)),
        ("b", num(c.b)),
        ("M0", num(c.m0)),
        ("cycle_min_H", num(c.cycle_min_h)),
        ("linking_sup_H", num(c.linking_sup_h)),
        ("linking_argmax", positions(&c.linking_argmax)),
        ("cycle_min_phi", num(c.cycle_min_phi)),
        ("doublings", c.doublings.into()),
    ])
}

/// Equilibria of the configured model, best first, writing the records.
fn equilibria(run: &Run, s: &Sink) -> Result<Vec<EquilibriumResult>, Failure> {
    let m = &run.model;
    let cfg = &run.config;
    let (results, calibration) = if m.len() == 2 {
        let search = find_equilibrium_n2(m, &cfg.n2_params())?;
        (vec![search.best], Value::Null)
    } else {
        let cycle = LinkingCycle::new(
            m.backend().domain(),
            m.len(),
            cfg.cycle.rho,
            cfg.cycle_center(),
            cfg.cycle.resolution,
        )?;
        let out = find_equilibria(m, &cycle, &cfg.search_params())?;
        if cfg.flow.record_every.is_some() {
            let mut header = vec!["sample".to_string(), "t".to_string()];
            header.extend(position_header(m.len()));
            header.push("H".into());
            let rows = out.flow.ensemble.iter().enumerate().flat_map(|(k, smp)| {
                smp.path.iter().map(move |p| {
                    let mut row = vec![k as f64, p.t];
                    row.extend(p.x.points().iter().flat_map(|q| [q.x, q.y]));
                    row.push(p.h);
                    row
                })
            });
            s.csv("flow_paths.csv", &header, rows)?;
        }
        (out.results, calibration_record(&out.calibration))
    };
    let body = record([
        ("backend", m.backend().name().into()),
        ("calibration", calibration),
        ("results", Value::Array(results.iter().map(|r| result_record(r, m.gamma())).collect())),
    ]);
    s.json("equilibrium.json", "equilibrium", body)?;
    if results.is_empty() {
        return Err(Failure::Unmet("no equilibrium was certified".into()));
    }
    Ok(results)
}

pub fn equilibrium(run: &Run) -> Outcome {
    let results = equilibria(run, &sink(run))?;
    for r in &results {
        println!("H = {:.16e}, residual {:.3e}", r.value, r.residual);
    }
    Ok(())
}

fn require_positions(run: &Run) -> Result<Configuration, Failure> {
    run.config
        .positions()
        .ok_or_else(|| Failure::Config("this command needs \"positions\"".into()))
}

pub fn simulate(run: &Run) -> Outcome {
    let x0 = require_positions(run)?;
    let d = &run.config.dynamics;
    let tr = integrate(&run.model, &x0, d.dt, d.t_final, run.config.scheme(), d.record_every)?;
    let mut header = vec!["t".to_string()];
    header.extend(position_header(x0.len()));
    header.push("H".into());
    let rows = tr.points.iter().map(|p| {
        let mut row = vec![p.t];
        row.extend(p.x.points().iter().flat_map(|q| [q.x, q.y]));
        row.push(p.h);
        row
    });
    sink(run).csv("trajectory.csv", &header, rows)?;
    println!("{} records, relative H drift {:.3e}", tr.points.len(), tr.max_relative_drift());
    if let Some(h) = tr.halted {
        println!("halted at t = {:.16e}: distance {:.3e} below {:.3e}", h.t, h.distance, h.threshold);
    }
    Ok(())
}

fn desing_record(s: &GridSolution) -> Value {
    let blobs = s
        .blobs
        .iter()
        .map(|b| {
            record([
                ("centroid", point(b.centroid)),
                ("circulation", num(b.circulation)),
                ("support_diameter", num(b.support_diameter)),
                ("nodes", b.nodes.into()),
                ("components", b.components.into()),
            ])
        })
        .collect();
    let ansatz = s
        .ansatz
        .iter()
        .map(|a| {
            record([
                ("plateau", num(a.a)),
                ("log_coefficient", num(a.log_coefficient)),
                ("core_radius", num(a.core_radius)),
                ("circulation", num(a.circulation)),
            ])
        })
        .collect();
    record([
        ("eps", num(s.params.eps)),
        ("delta", num(s.delta())),
        ("h", num(s.params.h)),
        ("p", num(s.params.p)),
        ("nodes", s.grid.len().into()),
        ("iterations", s.iterations.into()),
        ("residual", num(s.residual)),
        ("continued", s.continued.into()),
        ("separated", s.separated.into()),
        ("components", s.components.into()),
        ("blobs", Value::Array(blobs)),
        ("ansatz", Value::Array(ansatz)),
    ])
}

/// The rotated copy whose outermost vortex lies on the positive x-axis, so
/// that the configuration shares the grid's reflection axis.
fn canonical_orientation(x: &Configuration) -> Configuration {
    let far = x
        .points()
        .iter()
        .copied()
        .fold(Point::zeros(), |a, p| if p.norm() > a.norm() { p } else { a });
    x.rotated(-far.y.atan2(far.x))
}

pub fn desingularize(run: &Run) -> Outcome {
    let s = sink(run);
    let x = match run.config.positions() {
        Some(x) => x,
        None => {
            let x = equilibria(run, &s)?.swap_remove(0).x;
            if run.model.backend().domain().is_rotation_invariant() {
                canonical_orientation(&x)
            } else {
                x
            }
        }
    };
    let params = run.config.desing_params()?;
    let eps: Vec<f64> = params.iter().map(|p| p.eps).collect();
    let sols = solve_sequence(&run.model, &x, &params[0], &eps)?;
    let body = record([
        ("positions", positions(&x)),
        ("gamma", nums(run.model.gamma())),
        ("solutions", Value::Array(sols.iter().map(desing_record).collect())),
    ]);
    s.json("desing.json", "desingularize", body)?;
    if run.config.desing.fields {
        let head: Vec<String> = ["x", "y", "psi", "omega"].iter().map(|c| c.to_string()).collect();
        for (k, sol) in sols.iter().enumerate() {
            let rows = (0..sol.grid.len()).map(|i| {
                let p = sol.grid.position(i);
                vec![p.x, p.y, sol.psi[i], sol.omega[i]]
            });
            s.csv(&format!("fields_{k}.csv"), &head, rows)?;
        }
    }
    for sol in &sols {
        let circ: Vec<String> = sol.blobs.iter().map(|b| format!("{:.6e}", b.circulation)).collect();
        println!("ε = {:.3e}: {} blobs, circulations [{}]", sol.params.eps, sol.blobs.len(), circ.join(", "));
    }
    if sols.iter().all(|s| s.separated && s.blobs.len() == s.gamma.len()) {
        Ok(())
    } else {
        Err(Failure::Unmet("blob supports overlap or a vortex has no blob".into()))
    }
}

fn perturbed(x: &Configuration, i: usize, k: usize, step: f64) -> Configuration {
    let mut p = x.points().to_vec();
    p[i][k] += step;
    Configuration::new(p)
}

/// Relative error of an analytic gradient against central differences.
fn gradient_error(x: &Configuration, grad: &[Point], f: impl Fn(&Configuration) -> f64) -> f64 {
    let mut diff = 0.0;
    let mut scale = 0.0;
    for (i, g) in grad.iter().enumerate() {
        for k in 0..2 {
            let fd = (f(&perturbed(x, i, k, FD_STEP)) - f(&perturbed(x, i, k, -FD_STEP))) / (2.0 * FD_STEP);
            diff += (fd - g[k]).powi(2);
            scale += g[k] * g[k];
        }
    }
    diff.sqrt() / scale.sqrt().max(1.0)
}

fn check_record(name: &str, value: f64, limit: f64) -> (bool, Value) {
    let passed = value <= limit;
    (
        passed,
        record([
            ("name", name.into()),
            ("value", num(value)),
            ("limit", num(limit)),
            ("passed", passed.into()),
        ]),
    )
}

pub fn validate(run: &Run) -> Outcome {
    let m = &run.model;
    let b = m.backend();
    let dom = b.domain();
    let cfg = &run.config;
    let mut checks = Vec::new();

    let contracts = check_contracts(b, cfg.validate.contract_samples, cfg.seed)?;
    for c in &contracts.checks {
        checks.push((
            c.passed,
            record([
                ("name", c.name.into()),
                ("value", num(c.value)),
                ("limit", num(c.limit)),
                ("passed", c.passed.into()),
                ("note", c.note.clone().map_or(Value::Null, Value::String)),
            ]),
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let margin = 0.05 * dom.inradius();
    let mut worst: f64 = 0.0;
    let mut done = 0;
    while done < cfg.validate.configurations {
        let x = Configuration::new((0..m.len()).map(|_| dom.sample_interior(&mut rng, margin)).collect());
        if m.len() > 1 && x.min_separation() < margin {
            continue;
        }
        let e = m.evaluate(&x)?;
        worst = worst.max(gradient_error(&x, &e.grad_h, |y| m.eval_h(y).unwrap_or(f64::NAN)));
        worst = worst.max(gradient_error(&x, &e.grad_phi, |y| m.eval_phi(y).map_or(f64::NAN, |p| p.value)));
        done += 1;
    }
    checks.push(check_record("gradient finite differences", worst, GRADIENT_TOL));

    // boundary elements do not resolve sources inside their near field
    let near = b.near_field_distance();
    let ds: Vec<f64> = (0..=30)
        .map(|k| 10f64.powf(-4.0 + 3.0 * k as f64 / 30.0))
        .filter(|&d| d >= near)
        .collect();
    if ds.first() == Some(&1e-4) {
        let mut bases = Vec::new();
        for _ in 0..100_000 {
            if bases.len() == SWEEPS {
                break;
            }
            let x = dom.sample_interior(&mut rng, 0.0);
            if dom.boundary_frame(x).is_ok() {
                bases.push(x);
            }
        }
        if bases.len() < SWEEPS {
            return Err(Failure::Unmet("could not sample the boundary collar".into()));
        }
        let mut gap: f64 = 0.0;
        let mut slope: f64 = 0.0;
        for x0 in bases {
            let sweep = robin_sweep(b, x0, &ds)?;
            gap = sweep.iter().fold(gap, |g, s| g.max(s.h_gap.abs()));
            slope = slope.max(sweep[0].grad_gap);
        }
        checks.push(check_record("Robin gap", gap, ROBIN_GAP_BOUND));
        checks.push(check_record("Robin gradient gap at d = 1e-4", slope, ROBIN_GRADIENT_BOUND));
    } else {
        checks.push((
            true,
            record([
                ("name", "Robin sweeps".into()),
                ("passed", true.into()),
                ("note", format!("skipped: swept distances lie inside the near field {near:.3e}").into()),
            ]),
        ));
    }

    let passed = checks.iter().all(|(p, _)| *p);
    let body = record([
        ("backend", b.name().into()),
        ("passed", passed.into()),
        ("C1", num(contracts.c1)),
        ("C2", num(contracts.c2)),
        ("checks", Value::Array(checks.iter().map(|(_, v)| v.clone()).collect())),
    ]);
    sink(run).json("validate.json", "validate", body)?;
    for (p, v) in &checks {
        println!("{} {}", if *p { "ok  " } else { "FAIL" }, v["name"].as_str().unwrap_or(""));
    }
    if passed {
        Ok(())
    } else {
        Err(Failure::Unmet("validation failed".into()))
    }
}
