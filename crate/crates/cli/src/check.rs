use std::path::Path;

use kdv_star::io::serialize_f64;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::OutDir;

#[derive(Serialize)]
struct Params {
    graph: String,
    #[serde(serialize_with = "serialize_f64")]
    tolerance: f64,
}

/// Writes `report.json` and `report.txt`; true iff every gating condition
/// holds.
pub fn run(graph: &Path, out: &Path, tol: Option<f64>) -> Result<bool, CliError> {
    let cfg = RunConfig::load(graph, tol)?;
    let report = cfg.checklist()?;
    let mut dir = OutDir::create(out, "check")?;
    dir.input(&cfg.path, &cfg.source);
    dir.write("report.json", report.to_json() + "\n")?;
    dir.write("report.txt", report.to_table())?;
    dir.finish(&Params {
        graph: cfg.path.display().to_string(),
        tolerance: cfg.tolerance,
    })?;
    print!("{}", report.to_table());
    if !report.pass {
        println!("failed: {}", report.failed().join(", "));
    }
    Ok(report.pass)
}
