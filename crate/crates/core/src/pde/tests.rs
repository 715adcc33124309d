use nalgebra::DMatrix;

use super::*;
use crate::graph::EdgeParams;

const S2: f64 = std::f64::consts::SQRT_2;

fn std_edge() -> EdgeParams {
    EdgeParams::new(1.0, 0.0, -6.0, 1.0, 0.0)
}

fn real_line() -> (StarGraph, YUCoupling) {
    (
        StarGraph::uniform(std_edge(), 1, 1),
        YUCoupling::continuity(DMatrix::identity(1, 1)).unwrap(),
    )
}

fn y_junction() -> (StarGraph, YUCoupling) {
    let g = StarGraph::new(
        vec![std_edge()],
        vec![EdgeParams::new(1.0, 0.0, -6.0 * S2, 1.0, 0.0); 2],
    );
    let yu = YUCoupling::y_junction(
        1.0 / S2,
        DMatrix::from_row_slice(1, 2, &[1.0 / S2, 1.0 / S2]),
    )
    .unwrap();
    (g, yu)
}

fn profiles(g: &StarGraph) -> Vec<SolitonProfile> {
    g.edges()
        .map(|(_, p)| SolitonProfile::new(p).unwrap())
        .collect()
}

/// Orthonormal basis of the fields whose vertex traces lie in `Y`, the
/// subspace the scheme keeps invariant.
fn trace_subspace(g: &StarGraph, yu: &YUCoupling, nodes: usize) -> DMatrix<f64> {
    let dim = g.len() * nodes;
    let interior = dim - g.len();
    let y = yu.y_basis();
    let mut q = DMatrix::zeros(dim, interior + y.ncols());
    let mut col = 0;
    for e in 0..g.len() {
        for k in 1..nodes {
            q[(e * nodes + k, col)] = 1.0;
            col += 1;
        }
    }
    for j in 0..y.ncols() {
        for e in 0..g.len() {
            q[(e * nodes, col)] = y[(e, j)];
        }
        col += 1;
    }
    q.qr().q()
}

/// Spectrum of the linearization at zero restricted to the trace subspace.
fn restricted_spectrum(sim: &Simulation, yu: &YUCoupling) -> Vec<nalgebra::Complex<f64>> {
    let q = trace_subspace(sim.graph(), yu, sim.discretization().nodes());
    let j = q.transpose() * jacobian(sim) * &q;
    j.complex_eigenvalues().iter().cloned().collect()
}

/// Jacobian of the linearization at zero, column by column.
fn jacobian(sim: &Simulation) -> DMatrix<f64> {
    let g = sim.graph();
    let nodes = sim.discretization().nodes();
    let dim = g.len() * nodes;
    let mut j = DMatrix::zeros(dim, dim);
    let mut f = GraphField::zeros(g, sim.discretization());
    // central differences cancel the quadratic term
    let eps = 1e-6;
    for col in 0..dim {
        f.values[col / nodes][col % nodes] = eps;
        let up = sim.semidiscrete_rhs(&f).unwrap();
        f.values[col / nodes][col % nodes] = -eps;
        let down = sim.semidiscrete_rhs(&f).unwrap();
        for (row, (a, b)) in up.iter().flatten().zip(down.iter().flatten()).enumerate() {
            j[(row, col)] = (a - b) / (2.0 * eps);
        }
        f.values[col / nodes][col % nodes] = 0.0;
    }
    j
}

#[test]
fn discretization_contract() {
    assert!(Discretization::at_bound(40.0, 0.05, 1.0, 1.0).is_ok());
    assert!(matches!(
        Discretization::at_bound(40.0, 0.07, 1.0, 1.0),
        Err(PdeError::Discretization(_))
    ));
    assert!(matches!(
        Discretization::new(40.0, 0.05, 1e-3, 1.0, 1.0),
        Err(PdeError::Unstable { .. })
    ));
    let (g, yu) = real_line();
    let d = Discretization::at_bound(10.0, 0.1, 1.0, 0.5).unwrap();
    assert!(matches!(
        Simulation::new(&g, &yu, d),
        Err(PdeError::Unstable { .. })
    ));
}

#[test]
fn zero_is_a_fixed_point() {
    for (g, yu) in [real_line(), y_junction()] {
        let d = Discretization::at_bound(8.0, 0.1, 1.0, 1.0).unwrap();
        let sim = Simulation::new(&g, &yu, d).unwrap();
        let z = GraphField::zeros(&g, &d);
        assert!(sim
            .semidiscrete_rhs(&z)
            .unwrap()
            .iter()
            .flatten()
            .all(|v| *v == 0.0));
        assert!(sim
            .enforce_vertex(&z.values)
            .unwrap()
            .iter()
            .flatten()
            .all(|v| *v == 0.0));
        let run = sim.evolve(z, 0.5, &EvolveOptions::default()).unwrap();
        assert_eq!(run.final_field.max_abs(), 0.0);
    }
}

#[test]
fn linearization_has_no_growing_modes() {
    for (g, yu) in [real_line(), y_junction()] {
        let d = Discretization::at_bound(6.0, 0.1, 1.0, 1.0).unwrap();
        let sim = Simulation::new(&g, &yu, d).unwrap();
        let ev = restricted_spectrum(&sim, &yu);
        let radius = ev.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let growth = ev.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        assert!(growth <= 1e-9 * radius, "growth {growth}, radius {radius}");
        // RK4 covers the imaginary axis up to 2√2
        assert!(radius * d.dt < 2.0 * S2, "{}", radius * d.dt);
    }
}

#[test]
fn constant_state_is_stationary_away_from_the_far_end() {
    let (g, yu) = real_line();
    let d = Discretization::at_bound(4.0, 0.1, 1.0, 1.0).unwrap();
    let sim = Simulation::new(&g, &yu, d).unwrap();
    let f = GraphField {
        t: 0.0,
        values: vec![vec![0.3; d.nodes()]; 2],
    };
    let du = sim.semidiscrete_rhs(&f).unwrap();
    for v in &du {
        assert!(v[..d.nodes() - 2].iter().all(|x| x.abs() < 1e-9), "{v:?}");
    }
}

#[test]
fn ghosts_mirror_the_partner_edge_on_the_real_line() {
    let (g, yu) = real_line();
    let d = Discretization::at_bound(30.0, 0.05, 1.0, 1.0).unwrap();
    let sim = Simulation::new(&g, &yu, d).unwrap();
    let p = SolitonProfile::new(&EdgeParams {
        y0: 0.3,
        ..std_edge()
    })
    .unwrap();
    let f = GraphField::from_profiles(&g, &d, &[p, p], 0.0);
    let gh = sim.enforce_vertex(&f.values).unwrap();
    assert!((gh[0][0] - f.values[1][1]).abs() < 1e-12);
    assert!((gh[1][0] - f.values[0][1]).abs() < 1e-12);
    assert!((gh[0][1] - f.values[1][2]).abs() < 1e-12);
    assert!((gh[1][1] - f.values[0][2]).abs() < 1e-12);
}

#[test]
fn travelling_wave_rhs_is_second_order() {
    let (g, yu) = real_line();
    let p = SolitonProfile::new(&EdgeParams {
        y0: 0.4,
        ..std_edge()
    })
    .unwrap();
    let err = |h: f64| {
        let d = Discretization::at_bound(30.0, h, 1.0, 1.0).unwrap();
        let sim = Simulation::new(&g, &yu, d).unwrap();
        let f = GraphField::from_profiles(&g, &d, &[p, p], 0.0);
        let du = sim.semidiscrete_rhs(&f).unwrap();
        let mut worst: f64 = 0.0;
        for (e, s) in [(0, -1.0), (1, 1.0)] {
            for k in 0..d.nodes() {
                let exact = -p.speed() * p.eval(s * k as f64 * h, 1);
                worst = worst.max((du[e][k] - exact).abs());
            }
        }
        worst
    };
    let (e1, e2) = (err(0.1), err(0.05));
    let order = (e1 / e2).log2();
    assert!(
        order > 1.7 && order < 2.4,
        "errors {e1} {e2}, order {order}"
    );
}

#[test]
fn y_junction_traces_stay_in_y() {
    let (g, yu) = y_junction();
    let d = Discretization::at_bound(30.0, 0.1, 1.0, 1.0).unwrap();
    let sim = Simulation::new(&g, &yu, d).unwrap();
    let ps = profiles(&g);
    let init = GraphField::from_profiles(&g, &d, &ps, 0.0);
    let run = sim
        .evolve(
            init,
            1.0,
            &EvolveOptions {
                reference: Some(ps),
                ..EvolveOptions::default()
            },
        )
        .unwrap();
    assert!(run.peak_vertex.trace_to_y < 1e-12, "{:?}", run.peak_vertex);
    assert!(run.final_error().unwrap() < 0.05, "{:?}", run.final_error());
}

#[test]
fn blow_up_is_caught_with_last_stable_field() {
    let (g, yu) = real_line();
    let d = Discretization::at_bound(10.0, 0.1, 1.0, 1.0).unwrap();
    let sim = Simulation::new(&g, &yu, d).unwrap();
    let p = SolitonProfile::new(&std_edge()).unwrap();
    let init = GraphField::from_profiles(&g, &d, &[p, p], 0.0);
    let opts = EvolveOptions {
        blowup_factor: 1.0 + 1e-9,
        frames: 100,
        ..EvolveOptions::default()
    };
    match sim.evolve(init, 2.0, &opts) {
        Err(PdeError::BlowUp {
            last_stable, limit, ..
        }) => {
            assert!(last_stable.max_abs() <= limit);
        }
        other => panic!("{:?}", other.map(|r| r.steps)),
    }
}
