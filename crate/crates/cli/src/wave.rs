use std::path::Path;

use kdv_star::graph::load_config;
use kdv_star::io::{fmt17, serialize_f64};
use kdv_star::soliton::build_profile;
use kdv_star::{EdgeRef, Orientation};
use serde::Serialize;

use crate::config::read;
use crate::error::CliError;
use crate::output::{table, OutDir};

#[derive(Serialize)]
struct Params {
    graph: String,
    #[serde(serialize_with = "serialize_f64")]
    y_min: f64,
    #[serde(serialize_with = "serialize_f64")]
    y_max: f64,
    #[serde(serialize_with = "serialize_f64")]
    step: f64,
}

/// `LO:HI:STEP` with `LO < HI` and a positive step.
pub fn parse_range(s: &str) -> Result<(f64, f64, f64), CliError> {
    let bad = || CliError::Config(format!("range must be LO:HI:STEP, got {s:?}"));
    let parts: Vec<f64> = s
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [lo, hi, step] if lo < hi && step > 0.0 && step.is_finite() => Ok((lo, hi, step)),
        _ => Err(bad()),
    }
}

pub fn file_stem(e: EdgeRef) -> String {
    match e.side {
        Orientation::Incoming => format!("minus{}", e.index),
        Orientation::Outgoing => format!("plus{}", e.index),
    }
}

/// One `wave_<edge>.tsv` per edge with the profile, its derivatives and the
/// KdV residual.
pub fn run(graph: &Path, out: &Path, range: &str) -> Result<bool, CliError> {
    let source = read(graph)?;
    let g = load_config(&source)?.graph;
    let (lo, hi, step) = parse_range(range)?;
    let profiles = g
        .edges()
        .map(|(e, p)| build_profile(p).map_err(|err| CliError::Verdict(format!("edge {e}: {err}"))))
        .collect::<Result<Vec<_>, _>>()?;
    let mut dir = OutDir::create(out, "wave")?;
    dir.input(graph, &source);
    for ((e, _), p) in g.edges().zip(&profiles) {
        let comments = vec![
            format!("edge {e}"),
            format!("amplitude {}", fmt17(p.amplitude())),
            format!("width_rate {}", fmt17(p.width_rate())),
            format!("speed {}", fmt17(p.speed())),
        ];
        let rows = p.sample(lo, hi, step);
        dir.write(
            &format!("wave_{}.tsv", file_stem(e)),
            table(
                &comments,
                &["y", "phi", "phi1", "phi2", "phi3", "kdv_residual"],
                rows,
            ),
        )?;
    }
    dir.finish(&Params {
        graph: graph.display().to_string(),
        y_min: lo,
        y_max: hi,
        step,
    })?;
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("-2:3:0.5").unwrap(), (-2.0, 3.0, 0.5));
        for bad in ["1:1:0.1", "0:1:0", "0:1", "a:b:c", "0:1:-1"] {
            assert!(parse_range(bad).is_err(), "{bad}");
        }
        assert_eq!(file_stem(EdgeRef::plus(2)), "plus2");
    }
}
