use std::path::{Path, PathBuf};

use kdv_star::graph::load_config;
use kdv_star::io::{fmt17, serialize_f64};
use kdv_star::phaseplane::{
    classify, homoclinic_shoot, vector_field, PhaseParams, ShootOptions, Stationary,
};
use kdv_star::EdgeRef;
use serde::Serialize;

use crate::config::read;
use crate::error::CliError;
use crate::output::{table, OutDir};

pub enum Source {
    Graph {
        path: PathBuf,
        edge: String,
    },
    Inline {
        alpha: f64,
        beta: f64,
        gamma: f64,
        c: f64,
    },
}

#[derive(Serialize)]
struct Params {
    #[serde(skip_serializing_if = "Option::is_none")]
    graph: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    edge: Option<String>,
    #[serde(serialize_with = "serialize_f64")]
    alpha: f64,
    #[serde(serialize_with = "serialize_f64")]
    beta: f64,
    #[serde(serialize_with = "serialize_f64")]
    gamma: f64,
    #[serde(serialize_with = "serialize_f64")]
    c: f64,
    #[serde(serialize_with = "serialize_f64")]
    a: f64,
    #[serde(serialize_with = "serialize_f64")]
    range_lo: f64,
    #[serde(serialize_with = "serialize_f64")]
    range_hi: f64,
    samples: usize,
}

#[derive(Serialize)]
struct Point {
    kind: &'static str,
    #[serde(serialize_with = "serialize_f64")]
    phi: f64,
    #[serde(serialize_with = "serialize_f64")]
    psi: f64,
    /// Squared eigenvalue of the linearization.
    #[serde(serialize_with = "serialize_f64")]
    lambda_sq: f64,
}

#[derive(Serialize)]
struct Summary {
    classification: &'static str,
    #[serde(serialize_with = "serialize_f64")]
    discriminant: f64,
    stationary_points: Vec<Point>,
    /// Largest Hamiltonian drift along the homoclinic orbit, when traced.
    #[serde(skip_serializing_if = "Option::is_none")]
    orbit_energy_drift: Option<Drift>,
}

#[derive(Serialize)]
struct Drift(#[serde(serialize_with = "serialize_f64")] f64);

pub fn parse_edge(s: &str) -> Result<EdgeRef, CliError> {
    let bad = || CliError::Config(format!("edge must be minus<i> or plus<i>, got {s:?}"));
    if let Some(i) = s.strip_prefix("minus") {
        Ok(EdgeRef::minus(i.parse().map_err(|_| bad())?))
    } else if let Some(i) = s.strip_prefix("plus") {
        Ok(EdgeRef::plus(i.parse().map_err(|_| bad())?))
    } else {
        Err(bad())
    }
}

/// `LO:HI:N` with at least two samples.
fn parse_grid(s: &str) -> Result<(f64, f64, usize), CliError> {
    let bad = || CliError::Config(format!("phase range must be LO:HI:N, got {s:?}"));
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if lo.partial_cmp(&hi) != Some(std::cmp::Ordering::Less) || n < 2 {
        return Err(bad());
    }
    Ok((lo, hi, n))
}

pub fn run(source: Source, a: f64, range: Option<&str>, out: &Path) -> Result<bool, CliError> {
    let mut dir = OutDir::create(out, "phase")?;
    let (alpha, beta, gamma, c, graph, edge) = match source {
        Source::Graph { path, edge } => {
            let text = read(&path)?;
            let g = load_config(&text)?.graph;
            let e = parse_edge(&edge)?;
            let n = match e.side {
                kdv_star::Orientation::Incoming => g.n_minus(),
                kdv_star::Orientation::Outgoing => g.n_plus(),
            };
            if e.index >= n {
                return Err(CliError::Config(format!("graph has no edge {e}")));
            }
            dir.input(&path, &text);
            let p = *g.params(e);
            (
                p.alpha,
                p.beta,
                p.gamma,
                p.c,
                Some(path.display().to_string()),
                Some(edge),
            )
        }
        Source::Inline {
            alpha,
            beta,
            gamma,
            c,
        } => (alpha, beta, gamma, c, None, None),
    };
    let p =
        PhaseParams::new(alpha, beta, gamma, c, a).map_err(|e| CliError::Config(e.to_string()))?;
    let cls = classify(&p);

    let (name, points) = match cls.verdict {
        Stationary::NoStationaryPoint => ("NoStationaryPoint", vec![]),
        Stationary::OneDegenerate(s) => (
            "OneDegenerate",
            vec![Point {
                kind: "degenerate",
                phi: s.phi,
                psi: s.psi,
                lambda_sq: 0.0,
            }],
        ),
        Stationary::CenterAndSaddle {
            center,
            saddle,
            center_lambda_sq,
            saddle_lambda_sq,
        } => (
            "CenterAndSaddle",
            vec![
                Point {
                    kind: "center",
                    phi: center.phi,
                    psi: center.psi,
                    lambda_sq: center_lambda_sq,
                },
                Point {
                    kind: "saddle",
                    phi: saddle.phi,
                    psi: saddle.psi,
                    lambda_sq: saddle_lambda_sq,
                },
            ],
        ),
    };

    // default box: the stationary points with some margin
    let (lo, hi, n) = match range {
        Some(r) => parse_grid(r)?,
        None => {
            let phis: Vec<f64> = points.iter().map(|q| q.phi).collect();
            let (pmin, pmax) = phis
                .iter()
                .fold((0.0f64, 0.0f64), |(l, h), x| (l.min(*x), h.max(*x)));
            let pad = (0.5 * (pmax - pmin)).max(1.0);
            (pmin - pad, pmax + pad, 41)
        }
    };
    let header = vec![
        format!("classification {name}"),
        format!("discriminant {}", fmt17(cls.discriminant)),
    ];
    dir.write(
        "vector_field.tsv",
        table(
            &header,
            &["phi", "psi", "dphi", "dpsi"],
            vector_field(&p, (lo, hi), (lo, hi), n),
        ),
    )?;
    dir.write(
        "stationary_points.tsv",
        table(
            &header,
            &["phi", "psi", "lambda_sq"],
            points.iter().map(|q| [q.phi, q.psi, q.lambda_sq]),
        ),
    )?;

    let mut drift = None;
    if a == 0.0 && beta + c > 0.0 {
        let orbit = homoclinic_shoot(&p, 1e-7, 1, &ShootOptions::default())
            .map_err(|e| CliError::Config(format!("homoclinic orbit: {e}")))?;
        drift = Some(Drift(orbit.trajectory.max_energy_drift));
        dir.write(
            "orbit.tsv",
            table(
                &[format!(
                    "homoclinic orbit of the saddle, turning point phi = {}",
                    fmt17(orbit.turning_value)
                )],
                &["t", "phi", "psi", "H"],
                orbit.trajectory.rows(),
            ),
        )?;
    }
    dir.write_json(
        "phase.json",
        &Summary {
            classification: name,
            discriminant: cls.discriminant,
            stationary_points: points,
            orbit_energy_drift: drift,
        },
    )?;
    dir.finish(&Params {
        graph,
        edge,
        alpha,
        beta,
        gamma,
        c,
        a,
        range_lo: lo,
        range_hi: hi,
        samples: n,
    })?;
    println!("{name}, discriminant {}", fmt17(cls.discriminant));
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edges_and_grids() {
        assert_eq!(parse_edge("minus3").unwrap(), EdgeRef::minus(3));
        assert_eq!(parse_edge("plus0").unwrap(), EdgeRef::plus(0));
        assert!(parse_edge("plus").is_err());
        assert!(parse_edge("side1").is_err());
        assert_eq!(parse_grid("-1:1:5").unwrap(), (-1.0, 1.0, 5));
        assert!(parse_grid("-1:1:1").is_err());
    }
}
