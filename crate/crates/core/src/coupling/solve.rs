use nalgebra::DMatrix;
use thiserror::Error;

use super::{
    check_main_theorem, check_yjunction, spread, width_speed, ConditionReport, YJunctionSpec,
};
use crate::graph::{EdgeParams, StarGraph};

/// An edge whose linear coefficients and speed are fixed; `gamma` and `y0`
/// may be left for the solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartialEdge {
    pub alpha: f64,
    pub beta: f64,
    pub c: f64,
    pub gamma: Option<f64>,
    pub y0: Option<f64>,
}

impl PartialEdge {
    pub fn new(alpha: f64, beta: f64, c: f64) -> Self {
        Self {
            alpha,
            beta,
            c,
            gamma: None,
            y0: None,
        }
    }

    pub fn known(p: &EdgeParams) -> Self {
        Self {
            alpha: p.alpha,
            beta: p.beta,
            c: p.c,
            gamma: Some(p.gamma),
            y0: Some(p.y0),
        }
    }

    pub fn gamma(mut self, gamma: f64) -> Self {
        self.gamma = Some(gamma);
        self
    }

    pub fn y0(mut self, y0: f64) -> Self {
        self.y0 = Some(y0);
        self
    }

    fn margin(&self) -> f64 {
        self.beta + self.c
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PartialGraph {
    pub minus: Vec<PartialEdge>,
    pub plus: Vec<PartialEdge>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JumpModel {
    /// Continuous traces, `Y = span(1)`.
    Continuity,
    /// One-in/two-out with `Y = span{(1, a, a)}`; `None` lets the solver pick
    /// `a` from the weighted flux balance.
    YJunction { a: Option<f64> },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("infeasible: {condition} fails ({detail})")]
    Infeasible { condition: String, detail: String },
    #[error("underdetermined: {0}")]
    Underdetermined(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

fn infeasible(condition: &str, detail: impl Into<String>) -> SolveError {
    SolveError::Infeasible {
        condition: condition.into(),
        detail: detail.into(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolvedParams {
    pub graph: StarGraph,
    /// Jump ratio used for the Y-junction.
    pub a: Option<f64>,
    /// The other admissible jump ratio when `a` was solved for (`-a`).
    pub a_alternative: Option<f64>,
    /// Full checklist when a `U` was supplied.
    pub report: Option<ConditionReport>,
}

/// Fills in unknown `γ` and `y0` so that the amplitude and phase conditions
/// hold exactly, and the jump ratio `a` of a Y-junction if it is not given.
/// `α`, `β` and `c` are never changed; if they already violate a condition
/// the error names it.
pub fn solve_compatible_params(
    partial: &PartialGraph,
    model: JumpModel,
    u: Option<&DMatrix<f64>>,
    tol: f64,
) -> Result<SolvedParams, SolveError> {
    let edges: Vec<PartialEdge> = partial.minus.iter().chain(&partial.plus).copied().collect();
    let nm = partial.minus.len();
    if edges.is_empty() {
        return Err(SolveError::Invalid("graph has no edges".into()));
    }
    for (k, e) in edges.iter().enumerate() {
        if !(e.alpha > 0.0) || e.c == 0.0 || !e.c.is_finite() || !e.beta.is_finite() {
            return Err(SolveError::Invalid(format!(
                "edge {k}: need alpha > 0 and finite nonzero c"
            )));
        }
        if e.gamma == Some(0.0) {
            return Err(SolveError::Invalid(format!("edge {k}: gamma is zero")));
        }
    }
    if !edges.iter().any(|e| e.gamma.is_some() && e.y0.is_some()) {
        return Err(SolveError::Underdetermined(
            "no edge has both gamma and y0 given".into(),
        ));
    }
    if let Some(k) = edges.iter().position(|e| !(e.margin() > tol)) {
        return Err(infeasible(
            "C1",
            format!("beta + c = {} on edge {k}", edges[k].margin()),
        ));
    }
    let ws: Vec<f64> = edges
        .iter()
        .map(|e| width_speed(&EdgeParams::new(e.alpha, e.beta, 1.0, e.c, 0.0)))
        .collect();
    if spread(&ws) > tol {
        return Err(infeasible(
            "C3",
            format!("width-speed spread {}", spread(&ws)),
        ));
    }

    let flux = |es: &[PartialEdge]| es.iter().map(|e| e.alpha / (e.c * e.c)).sum::<f64>();
    let drift = |es: &[PartialEdge]| es.iter().map(|e| e.beta).sum::<f64>();
    let (a, a_alternative) = match model {
        JumpModel::Continuity => {
            let r5 = flux(&partial.minus) - flux(&partial.plus);
            if r5.abs() > tol {
                return Err(infeasible("C5", format!("flux residual {}", r5.abs())));
            }
            let r6 = drift(&partial.minus) - drift(&partial.plus);
            if r6.abs() > tol {
                return Err(infeasible("C6", format!("drift residual {}", r6.abs())));
            }
            (None, None)
        }
        JumpModel::YJunction { a } => {
            if nm != 1 || partial.plus.len() != 2 {
                return Err(SolveError::Invalid(
                    "a Y-junction has one incoming and two outgoing edges".into(),
                ));
            }
            let (a, alt) = match a {
                Some(a) if a == 0.0 || !a.is_finite() => {
                    return Err(SolveError::Invalid(format!("jump ratio a = {a}")));
                }
                Some(a) => (a, None),
                None => {
                    let a = (flux(&partial.minus) / flux(&partial.plus)).sqrt();
                    (a, Some(-a))
                }
            };
            let r5 = flux(&partial.minus) - a * a * flux(&partial.plus);
            if r5.abs() > tol {
                return Err(infeasible(
                    "C5Y",
                    format!("weighted flux residual {}", r5.abs()),
                ));
            }
            let r6 = drift(&partial.minus) - a * a * drift(&partial.plus);
            if r6.abs() > tol {
                return Err(infeasible(
                    "C6Y",
                    format!("weighted drift residual {}", r6.abs()),
                ));
            }
            (Some(a), alt)
        }
    };

    // amplitude condition: factor_e (β+c)/γ equal on all edges
    let factor = |k: usize| match a {
        Some(a) if k < nm => a,
        _ => 1.0,
    };
    let known: Vec<f64> = edges
        .iter()
        .enumerate()
        .filter_map(|(k, e)| e.gamma.map(|g| factor(k) * e.margin() / g))
        .collect();
    let c4 = if a.is_some() { "C4Y" } else { "C4" };
    if spread(&known) > tol {
        return Err(infeasible(
            c4,
            format!("given gammas disagree, spread {}", spread(&known)),
        ));
    }
    let ratio = known[0];
    let phases: Vec<f64> = edges.iter().filter_map(|e| e.y0.map(|y| y / e.c)).collect();
    let c2 = if a.is_some() { "C2Y" } else { "C2" };
    if spread(&phases) > tol {
        return Err(infeasible(
            c2,
            format!("given phases disagree, spread {}", spread(&phases)),
        ));
    }
    let phase = phases[0];

    let complete: Vec<EdgeParams> = edges
        .iter()
        .enumerate()
        .map(|(k, e)| {
            let gamma = e.gamma.unwrap_or(factor(k) * e.margin() / ratio);
            let y0 = e.y0.unwrap_or(phase * e.c);
            EdgeParams::new(e.alpha, e.beta, gamma, e.c, y0)
        })
        .collect();
    let graph = StarGraph::new(complete[..nm].to_vec(), complete[nm..].to_vec());

    let report = match u {
        None => None,
        Some(u) => Some(
            match a {
                None => check_main_theorem(&graph, u, tol),
                Some(a) => {
                    YJunctionSpec::from_graph(&graph, a, u).and_then(|s| check_yjunction(&s, tol))
                }
            }
            .map_err(|e| SolveError::Invalid(e.to_string()))?,
        ),
    };
    Ok(SolvedParams {
        graph,
        a,
        a_alternative,
        report,
    })
}
