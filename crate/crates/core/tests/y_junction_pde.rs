//! The travelling wave on a symmetric Y-junction under the finite-difference
//! solver.

use kdv_star::coupling::check_yjunction;
use kdv_star::coupling::YJunctionSpec;
use kdv_star::krein::YUCoupling;
use kdv_star::pde::{convergence_study, Discretization};
use kdv_star::soliton::build_profile;
use kdv_star::EdgeParams;

const S2: f64 = std::f64::consts::SQRT_2;

#[test]
fn y_junction_wave_converges_at_second_order() {
    let spec = YJunctionSpec {
        a: 1.0 / S2,
        minus: EdgeParams::new(1.0, 0.0, -6.0, 1.0, 0.0),
        plus: [EdgeParams::new(1.0, 0.0, -6.0 * S2, 1.0, 0.0); 2],
        u: [1.0 / S2, 1.0 / S2],
    };
    // the usual speed mapping omits the jump ratio; this U satisfies the
    // derivative relation along the wave instead
    let report = check_yjunction(&spec, 1e-12).unwrap();
    assert_eq!(report.failed(), ["C7Y"]);
    assert!(report.entry("C7Ya").unwrap().pass);
    let g = spec.graph();
    let yu = YUCoupling::y_junction(spec.a, spec.u_matrix()).unwrap();
    let profiles: Vec<_> = g.edges().map(|(_, p)| build_profile(p).unwrap()).collect();
    let discs: Vec<_> = [0.2, 0.1, 0.05]
        .iter()
        .map(|&h| Discretization::at_bound(30.0, h, 1.0, 1.0).unwrap())
        .collect();
    let study = convergence_study(&g, &yu, &discs, &profiles, 5.0).unwrap();
    let fine = &study.grids[2];
    assert!(fine.final_error <= 2e-2, "{:?}", study);
    assert!(study.monotone, "{:?}", study);
    assert!(study.orders.iter().all(|p| *p > 1.6), "{:?}", study.orders);
    assert!(
        fine.peak_vertex.trace_to_y < 1e-10,
        "{:?}",
        fine.peak_vertex
    );
    let coarse = &study.grids[1].peak_vertex;
    assert!(
        fine.peak_vertex.max() < 0.5 * coarse.max(),
        "{coarse:?} {:?}",
        fine.peak_vertex
    );
}
