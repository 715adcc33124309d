use std::path::Path;

use kdv_star::io::{fmt17, serialize_f64, serialize_opt_f64};
use kdv_star::pde::{Diagnostic, Discretization, EvolveOptions, GraphField, PdeError, Simulation};
use kdv_star::soliton::build_profile;
use kdv_star::{coupling::VertexResiduals, StarGraph};
use serde::Serialize;

use crate::config::{simulate_table, RunConfig, SimulateTable};
use crate::error::CliError;
use crate::output::{table, OutDir};

pub struct Overrides {
    pub t_final: Option<f64>,
    pub h: Option<f64>,
    pub tol: Option<f64>,
    pub override_check: bool,
}

#[derive(Serialize)]
struct Params {
    graph: String,
    #[serde(serialize_with = "serialize_f64")]
    tolerance: f64,
    #[serde(serialize_with = "serialize_f64")]
    length: f64,
    #[serde(serialize_with = "serialize_f64")]
    h: f64,
    #[serde(serialize_with = "serialize_opt_f64")]
    dt: Option<f64>,
    #[serde(serialize_with = "serialize_f64")]
    c_stab: f64,
    #[serde(serialize_with = "serialize_f64")]
    t_final: f64,
    frames: usize,
    #[serde(serialize_with = "serialize_f64")]
    error_threshold: f64,
    #[serde(serialize_with = "serialize_f64")]
    residual_threshold: f64,
    #[serde(serialize_with = "serialize_f64")]
    blowup_factor: f64,
    override_check: bool,
}

impl Params {
    fn new(cfg: &RunConfig, t: &SimulateTable, override_check: bool) -> Self {
        Self {
            graph: cfg.path.display().to_string(),
            tolerance: cfg.tolerance,
            length: t.length,
            h: t.h,
            dt: t.dt,
            c_stab: t.c_stab,
            t_final: t.t_final,
            frames: t.frames,
            error_threshold: t.error_threshold,
            residual_threshold: t.residual_threshold,
            blowup_factor: t.blowup_factor,
            override_check,
        }
    }
}

#[derive(Serialize)]
struct Summary<'a> {
    checklist_pass: bool,
    failed_conditions: Vec<&'a str>,
    #[serde(serialize_with = "serialize_f64")]
    dt: f64,
    steps: usize,
    #[serde(serialize_with = "serialize_opt_f64")]
    final_error: Option<f64>,
    peak_vertex: VertexResiduals,
    pass: bool,
}

fn frame_table(g: &StarGraph, h: f64, f: &GraphField) -> Vec<u8> {
    table(
        &[format!("t {}", fmt17(f.t))],
        &["edge", "x", "u"],
        f.rows(g, h),
    )
}

fn diagnostics_log(diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .map(|d| serde_json::to_string(d).expect("diagnostics serialize") + "\n")
        .collect()
}

fn setup_error(e: PdeError) -> CliError {
    CliError::Config(e.to_string())
}

/// Evolves the travelling wave and compares it with the exact solution.
/// True iff the final error and the peak vertex residual are within the
/// configured thresholds.
pub fn run(graph: &Path, out: &Path, o: Overrides) -> Result<bool, CliError> {
    let cfg = RunConfig::load(graph, o.tol)?;
    let mut t = simulate_table(&cfg.source)?;
    if let Some(h) = o.h {
        t.h = h;
    }
    if let Some(tf) = o.t_final {
        t.t_final = tf;
    }
    if !(t.h > 0.0 && t.t_final > 0.0) {
        return Err(CliError::Config(
            "--h and --t-final must be positive".into(),
        ));
    }
    let params = Params::new(&cfg, &t, o.override_check);
    let report = cfg.checklist()?;

    let mut dir = OutDir::create(out, "simulate")?;
    dir.input(&cfg.path, &cfg.source);
    dir.write("report.json", report.to_json() + "\n")?;
    if !report.pass && !o.override_check {
        dir.finish(&params)?;
        eprintln!(
            "checklist fails ({}); pass --override-check to simulate anyway",
            report.failed().join(", ")
        );
        return Ok(false);
    }

    let g = &cfg.graph;
    let disc = match t.dt {
        Some(dt) => Discretization::new(t.length, t.h, dt, t.c_stab, g.max_alpha()),
        None => Discretization::at_bound(t.length, t.h, t.c_stab, g.max_alpha()),
    }
    .map_err(setup_error)?;
    let profiles = g
        .edges()
        .map(|(e, p)| build_profile(p).map_err(|err| CliError::Config(format!("edge {e}: {err}"))))
        .collect::<Result<Vec<_>, _>>()?;
    let sim = Simulation::new(g, &cfg.y_coupling()?, disc).map_err(setup_error)?;
    let init = GraphField::from_profiles(g, &disc, &profiles, 0.0);
    let opts = EvolveOptions {
        frames: t.frames,
        keep_frames: true,
        reference: Some(profiles),
        blowup_factor: t.blowup_factor,
        ..EvolveOptions::default()
    };

    match sim.evolve(init, t.t_final, &opts) {
        Ok(run) => {
            for (i, f) in run.frames.iter().enumerate() {
                dir.write(
                    &format!("frames/frame_{i:04}.tsv"),
                    frame_table(g, disc.h, f),
                )?;
            }
            dir.write("diagnostics.jsonl", diagnostics_log(&run.diagnostics))?;
            let final_error = run.final_error();
            let pass = final_error.is_some_and(|e| e <= t.error_threshold)
                && run.peak_vertex.max() <= t.residual_threshold;
            dir.write_json(
                "summary.json",
                &Summary {
                    checklist_pass: report.pass,
                    failed_conditions: report.failed(),
                    dt: run.dt,
                    steps: run.steps,
                    final_error,
                    peak_vertex: run.peak_vertex,
                    pass,
                },
            )?;
            dir.finish(&params)?;
            println!(
                "{} steps, final relative error {}, peak vertex residual {}",
                run.steps,
                final_error.map_or("n/a".into(), fmt17),
                fmt17(run.peak_vertex.max())
            );
            Ok(pass)
        }
        Err(PdeError::BlowUp {
            t: at,
            max_abs,
            limit,
            last_stable,
            diagnostics,
        }) => {
            dir.write("last_stable.tsv", frame_table(g, disc.h, &last_stable))?;
            dir.write("diagnostics.jsonl", diagnostics_log(&diagnostics))?;
            dir.finish(&params)?;
            Err(CliError::BlowUp(format!(
                "blow-up at t = {at}: max |u| = {max_abs} exceeds {limit}; last stable frame at t = {}",
                last_stable.t
            )))
        }
        Err(e) => Err(setup_error(e)),
    }
}
