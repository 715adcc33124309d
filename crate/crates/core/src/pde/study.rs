use serde::Serialize;

use super::{Discretization, EvolveOptions, GraphField, PdeError, Simulation};
use crate::coupling::VertexResiduals;
use crate::graph::StarGraph;
use crate::io::{serialize_f64, serialize_f64_vec};
use crate::krein::YUCoupling;
use crate::soliton::SolitonProfile;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridResult {
    #[serde(serialize_with = "serialize_f64")]
    pub h: f64,
    #[serde(serialize_with = "serialize_f64")]
    pub dt: f64,
    pub steps: usize,
    /// Relative L² error against the travelling wave at the final time.
    #[serde(serialize_with = "serialize_f64")]
    pub final_error: f64,
    /// Largest vertex residuals over the output frames.
    pub peak_vertex: VertexResiduals,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceStudy {
    pub grids: Vec<GridResult>,
    /// `log(e_i / e_{i+1}) / log(h_i / h_{i+1})` per consecutive pair.
    #[serde(serialize_with = "serialize_f64_vec")]
    pub orders: Vec<f64>,
    #[serde(serialize_with = "serialize_f64")]
    pub target_order: f64,
    /// Errors strictly decrease under refinement.
    pub monotone: bool,
}

/// Observed orders between consecutive grids.
pub fn observed_orders(h: &[f64], e: &[f64]) -> Vec<f64> {
    h.windows(2)
        .zip(e.windows(2))
        .map(|(h, e)| (e[0] / e[1]).ln() / (h[0] / h[1]).ln())
        .collect()
}

/// Runs the travelling wave from `t = 0` to `t_final` on every grid (in
/// parallel) and reports errors and observed orders. Grids must be ordered
/// from coarse to fine.
pub fn convergence_study(
    g: &StarGraph,
    yu: &YUCoupling,
    discs: &[Discretization],
    profiles: &[SolitonProfile],
    t_final: f64,
) -> Result<ConvergenceStudy, PdeError> {
    if discs.len() < 3 {
        return Err(PdeError::Setup(format!(
            "need at least 3 grids, got {}",
            discs.len()
        )));
    }
    if discs.windows(2).any(|w| !(w[1].h < w[0].h)) {
        return Err(PdeError::Setup(
            "grids must be refined monotonically".into(),
        ));
    }
    let sims = discs
        .iter()
        .map(|d| Simulation::new(g, yu, *d))
        .collect::<Result<Vec<_>, _>>()?;
    let opts = EvolveOptions {
        frames: 20,
        reference: Some(profiles.to_vec()),
        ..EvolveOptions::default()
    };
    let results: Vec<Result<GridResult, PdeError>> = std::thread::scope(|s| {
        let handles: Vec<_> = sims
            .iter()
            .map(|sim| {
                let opts = &opts;
                s.spawn(move || {
                    let init =
                        GraphField::from_profiles(sim.graph(), sim.discretization(), profiles, 0.0);
                    let run = sim.evolve(init, t_final, opts)?;
                    Ok(GridResult {
                        h: sim.discretization().h,
                        dt: run.dt,
                        steps: run.steps,
                        final_error: run.final_error().unwrap_or(f64::NAN),
                        peak_vertex: run.peak_vertex,
                    })
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("grid worker panicked"))
            .collect()
    });
    let grids = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let hs: Vec<f64> = grids.iter().map(|r| r.h).collect();
    let es: Vec<f64> = grids.iter().map(|r| r.final_error).collect();
    Ok(ConvergenceStudy {
        orders: observed_orders(&hs, &es),
        monotone: es.windows(2).all(|w| w[1] < w[0]),
        grids,
        target_order: 2.0,
    })
}
