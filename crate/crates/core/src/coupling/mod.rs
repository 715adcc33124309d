//! Existence of solitary waves on a star graph.
//!
//! With `(Y, U)` vertex conditions a graph-wide travelling wave exists exactly
//! when every edge carries the closed-form profile and the profiles fit
//! together at the vertex. The checklist is:
//!
//! | id | condition |
//! |----|-----------|
//! | C1 | `β + c > 0` on every edge |
//! | C2 | `y0 / c` equal on all edges |
//! | C3 | `√((β+c)/α) · c` equal on all edges |
//! | C4 | `(β+c) / γ` equal on all edges |
//! | C5 | `Σ₋ α/c² − Σ₊ α/c² = 0` |
//! | C6 | `Σ₋ β − Σ₊ β = 0` |
//! | C7 | `U (1/c)₊ = (1/c)₋` |
//!
//! Equalities across edges are scored by the spread
//! `(max − min) / max(1, mean |v|)`; sums and the `U` mapping by absolute
//! residuals.

mod report;
mod solve;
mod vertex;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::graph::{validate_graph, EdgeParams, EdgeRef, Orientation, StarGraph, Violation};
use crate::krein::{is_weighted_contraction, KreinError};
use crate::soliton::SolitonProfile;

pub use report::{ConditionEntry, ConditionReport, ProfileSummary};
pub use solve::{
    solve_compatible_params, JumpModel, PartialEdge, PartialGraph, SolveError, SolvedParams,
};
pub use vertex::{verify_vertex_numerically, vertex_residuals, BoundaryTrace, VertexResiduals};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CouplingError {
    #[error("invalid graph: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidGraph(Vec<Violation>),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("U is not a contraction in the alpha-weighted norms (smallest eigenvalue of D+ - U^T D- U is {min_eig})")]
    NotContractive { min_eig: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
}

impl From<KreinError> for CouplingError {
    fn from(e: KreinError) -> Self {
        CouplingError::Dimension(e.to_string())
    }
}

/// `(max − min) / max(1, mean |v|)`.
pub fn spread(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(*v), hi.max(*v))
        });
    let mean = values.iter().map(|v| v.abs()).sum::<f64>() / values.len() as f64;
    let r = (hi - lo) / mean.max(1.0);
    if r.is_nan() {
        f64::INFINITY
    } else {
        r
    }
}

/// Edges outside the largest group of values agreeing within `tol` (on the
/// spread scale). Ties go to the group found first.
fn outliers(values: &[f64], refs: &[EdgeRef], tol: f64) -> Vec<EdgeRef> {
    let mean = values.iter().map(|v| v.abs()).sum::<f64>() / values.len().max(1) as f64;
    let scale = mean.max(1.0);
    let close = |a: f64, b: f64| (a - b).abs() / scale <= tol;
    let best = (0..values.len())
        .max_by_key(|&i| {
            let n = values.iter().filter(|v| close(values[i], **v)).count();
            // prefer earlier centres on ties
            (n, usize::MAX - i)
        })
        .unwrap_or(0);
    refs.iter()
        .zip(values)
        .filter(|(_, v)| !close(values[best], **v))
        .map(|(r, _)| *r)
        .collect()
}

fn equality_entry(
    id: &str,
    description: &str,
    values: &[f64],
    refs: &[EdgeRef],
    tol: f64,
) -> ConditionEntry {
    let residual = spread(values);
    ConditionEntry::new(id, description, residual, residual <= tol)
        .blame(outliers(values, refs, tol))
}

fn positivity_entry(
    id: &str,
    description: &str,
    params: &[(EdgeRef, EdgeParams)],
    tol: f64,
) -> ConditionEntry {
    let residual = params
        .iter()
        .map(|(_, p)| (-p.margin()).max(0.0))
        .fold(0.0, f64::max);
    let bad: Vec<EdgeRef> = params
        .iter()
        .filter(|(_, p)| !(p.margin() > tol))
        .map(|(e, _)| *e)
        .collect();
    ConditionEntry::new(id, description, residual, bad.is_empty()).blame(bad)
}

fn width_speed(p: &EdgeParams) -> f64 {
    (p.margin().max(0.0) / p.alpha).sqrt() * p.c
}

fn inverse_speeds(g: &StarGraph, side: Orientation) -> DVector<f64> {
    DVector::from_iterator(
        match side {
            Orientation::Incoming => g.n_minus(),
            Orientation::Outgoing => g.n_plus(),
        },
        g.side(side).map(|p| 1.0 / p.c),
    )
}

/// `U (1/c)₊ − (1/c)₋` as an entry; blames the incoming rows that miss and
/// the outgoing edges feeding them.
fn speed_mapping_entry(
    id: &str,
    description: &str,
    g: &StarGraph,
    u: &DMatrix<f64>,
    scale: f64,
    tol: f64,
) -> ConditionEntry {
    let r = scale * (u * inverse_speeds(g, Orientation::Outgoing))
        - inverse_speeds(g, Orientation::Incoming);
    let residual = r.amax();
    let mut blame = Vec::new();
    for i in 0..r.len() {
        if r[i].abs() > tol || r[i].is_nan() {
            blame.push(EdgeRef::minus(i));
            for j in 0..u.ncols() {
                if u[(i, j)] != 0.0 {
                    blame.push(EdgeRef::plus(j));
                }
            }
        }
    }
    blame.sort();
    blame.dedup();
    ConditionEntry::new(id, description, residual, residual <= tol).blame(blame)
}

fn check_u(g: &StarGraph, u: &DMatrix<f64>, tol: f64) -> Result<(), CouplingError> {
    let violations = validate_graph(g);
    if !violations.is_empty() {
        return Err(CouplingError::InvalidGraph(violations));
    }
    if u.shape() != (g.n_minus(), g.n_plus()) {
        return Err(CouplingError::Dimension(format!(
            "U is {}x{}, graph needs {}x{}",
            u.nrows(),
            u.ncols(),
            g.n_minus(),
            g.n_plus()
        )));
    }
    let v = is_weighted_contraction(
        u,
        &g.alphas(Orientation::Incoming),
        &g.alphas(Orientation::Outgoing),
        tol,
    )?;
    if !v.pass {
        return Err(CouplingError::NotContractive {
            min_eig: v.residual,
        });
    }
    Ok(())
}

fn profiles_of(g: &StarGraph) -> Option<Vec<(EdgeRef, SolitonProfile)>> {
    g.edges()
        .map(|(e, p)| SolitonProfile::new(p).ok().map(|s| (e, s)))
        .collect()
}

/// The checklist C1–C7 for continuity coupling `Y = span(1)` and the given
/// `U`. A passing report carries the per-edge profiles of the wave.
pub fn check_main_theorem(
    g: &StarGraph,
    u: &DMatrix<f64>,
    tol: f64,
) -> Result<ConditionReport, CouplingError> {
    check_u(g, u, tol)?;
    let mut conditions = coefficient_conditions(g, tol);
    conditions.push(speed_mapping_entry(
        "C7",
        "U (1/c)_+ = (1/c)_-",
        g,
        u,
        1.0,
        tol,
    ));
    Ok(ConditionReport::new(
        "main-theorem",
        tol,
        conditions,
        || profiles_of(g),
    ))
}

/// C1–C6, the conditions that do not involve `U`.
fn coefficient_conditions(g: &StarGraph, tol: f64) -> Vec<ConditionEntry> {
    let params: Vec<(EdgeRef, EdgeParams)> = g.edges().map(|(e, p)| (e, *p)).collect();
    let refs: Vec<EdgeRef> = params.iter().map(|(e, _)| *e).collect();
    let values = |f: fn(&EdgeParams) -> f64| params.iter().map(|(_, p)| f(p)).collect::<Vec<_>>();

    let flux: f64 = g
        .side(Orientation::Incoming)
        .map(|p| p.alpha / (p.c * p.c))
        .sum::<f64>()
        - g.side(Orientation::Outgoing)
            .map(|p| p.alpha / (p.c * p.c))
            .sum::<f64>();
    let drift: f64 = g.side(Orientation::Incoming).map(|p| p.beta).sum::<f64>()
        - g.side(Orientation::Outgoing).map(|p| p.beta).sum::<f64>();

    vec![
        positivity_entry("C1", "beta + c > 0 on every edge", &params, tol),
        equality_entry(
            "C2",
            "y0 / c equal on all edges",
            &values(|p| p.y0 / p.c),
            &refs,
            tol,
        ),
        equality_entry(
            "C3",
            "sqrt((beta + c) / alpha) * c equal on all edges",
            &values(width_speed),
            &refs,
            tol,
        ),
        equality_entry(
            "C4",
            "(beta + c) / gamma equal on all edges",
            &values(|p| p.margin() / p.gamma),
            &refs,
            tol,
        ),
        ConditionEntry::new(
            "C5",
            "sum_- alpha/c^2 - sum_+ alpha/c^2 = 0",
            flux.abs(),
            flux.abs() <= tol,
        ),
        ConditionEntry::new(
            "C6",
            "sum_- beta - sum_+ beta = 0",
            drift.abs(),
            drift.abs() <= tol,
        ),
    ]
}

/// Outcome of the scaling corollary check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScalingVerdict {
    /// Some edge's `(α, β, γ, c)` is not a multiple of another's.
    Inapplicable,
    /// The corollary's conclusion holds: either no wave exists, or all
    /// parameter tuples coincide.
    Consistent { wave_exists: bool },
    /// A wave exists although the tuples differ. Never expected.
    CounterexampleFound,
}

/// Whether a graph with mutually proportional parameter tuples carries a
/// wave for some contractive `U` only when all tuples are equal.
///
/// A contractive `U` satisfying C7 exists iff C5 holds (the rank-one map
/// `U = v wᵀ D₊ / |w|²` sends `w = (1/c)₊` to `v = (1/c)₋` and has weighted
/// norm `|v|₋ / |w|₊`), so existence is decided by C1–C6.
pub fn check_scaling_corollary(g: &StarGraph, tol: f64) -> ScalingVerdict {
    let tuple = |p: &EdgeParams| [p.alpha, p.beta, p.gamma, p.c];
    let params: Vec<[f64; 4]> = g.edges().map(|(_, p)| tuple(p)).collect();
    let Some(first) = params.first() else {
        return ScalingVerdict::Inapplicable;
    };
    let mut scales = Vec::with_capacity(params.len());
    for t in &params {
        let p = t[0] / first[0];
        let fits = t
            .iter()
            .zip(first)
            .all(|(a, b)| (a - p * b).abs() <= tol * a.abs().max(1.0));
        if !fits {
            return ScalingVerdict::Inapplicable;
        }
        scales.push(p);
    }
    let exists = match wave_exists_for_some_u(g, tol) {
        Some(e) => e,
        None => return ScalingVerdict::Inapplicable,
    };
    if !exists {
        return ScalingVerdict::Consistent { wave_exists: false };
    }
    if scales.iter().all(|p| (p - 1.0).abs() <= tol) {
        ScalingVerdict::Consistent { wave_exists: true }
    } else {
        ScalingVerdict::CounterexampleFound
    }
}

/// C1–C6 of the main theorem; `None` for graphs that fail validation.
fn wave_exists_for_some_u(g: &StarGraph, tol: f64) -> Option<bool> {
    if !validate_graph(g).is_empty() {
        return None;
    }
    Some(coefficient_conditions(g, tol).iter().all(|c| c.pass))
}

/// Outcome of the balanced-graph corollary check.
#[derive(Debug, Clone, PartialEq)]
pub enum BalancedVerdict {
    Inapplicable(String),
    Pass,
    Fail(Vec<String>),
}

impl BalancedVerdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, BalancedVerdict::Pass)
    }
}

/// Constant `α`, `β` and speeds `c ≥ −2β/3`: a wave exists iff the graph is
/// balanced, `γ`, `c`, `y0` are constant, `U` maps `(1/c)₊` to `(1/c)₋` and
/// `β + c > 0`.
pub fn check_balanced_corollary(g: &StarGraph, u: &DMatrix<f64>, tol: f64) -> BalancedVerdict {
    let params: Vec<EdgeParams> = g.edges().map(|(_, p)| *p).collect();
    if params.is_empty() {
        return BalancedVerdict::Inapplicable("empty graph".into());
    }
    let col = |f: fn(&EdgeParams) -> f64| params.iter().map(f).collect::<Vec<_>>();
    if spread(&col(|p| p.alpha)) > tol || spread(&col(|p| p.beta)) > tol {
        return BalancedVerdict::Inapplicable("alpha and beta are not constant".into());
    }
    if let Some((e, _)) = g.edges().find(|(_, p)| p.c < -2.0 / 3.0 * p.beta + tol) {
        return BalancedVerdict::Inapplicable(format!("speed on {e} is below -2 beta / 3"));
    }
    if u.shape() != (g.n_minus(), g.n_plus()) {
        return BalancedVerdict::Inapplicable("U has the wrong shape".into());
    }
    let mut failed = Vec::new();
    if g.n_minus() != g.n_plus() {
        failed.push("graph not balanced".to_string());
    }
    for (name, f) in [
        (
            "gamma",
            (|p: &EdgeParams| p.gamma) as fn(&EdgeParams) -> f64,
        ),
        ("c", |p| p.c),
        ("y0", |p| p.y0),
    ] {
        if spread(&col(f)) > tol {
            failed.push(format!("{name} not constant"));
        }
    }
    let r = u * inverse_speeds(g, Orientation::Outgoing) - inverse_speeds(g, Orientation::Incoming);
    if r.amax() > tol {
        failed.push("U does not map (1/c)_+ to (1/c)_-".into());
    }
    if params.iter().any(|p| !(p.margin() > tol)) {
        failed.push("beta + c not positive".into());
    }
    if failed.is_empty() {
        BalancedVerdict::Pass
    } else {
        BalancedVerdict::Fail(failed)
    }
}

/// A one-in/two-out graph with jump ratio `a` and `U` a `1x2` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct YJunctionSpec {
    pub a: f64,
    pub minus: EdgeParams,
    pub plus: [EdgeParams; 2],
    pub u: [f64; 2],
}

impl YJunctionSpec {
    pub fn from_graph(g: &StarGraph, a: f64, u: &DMatrix<f64>) -> Result<Self, CouplingError> {
        if g.n_minus() != 1 || g.n_plus() != 2 {
            return Err(CouplingError::Dimension(format!(
                "a Y-junction has one incoming and two outgoing edges, got {} and {}",
                g.n_minus(),
                g.n_plus()
            )));
        }
        if u.shape() != (1, 2) {
            return Err(CouplingError::Dimension(format!(
                "U must be 1x2, got {:?}",
                u.shape()
            )));
        }
        Ok(Self {
            a,
            minus: g.minus[0].params,
            plus: [g.plus[0].params, g.plus[1].params],
            u: [u[(0, 0)], u[(0, 1)]],
        })
    }

    pub fn graph(&self) -> StarGraph {
        StarGraph::new(vec![self.minus], self.plus.to_vec())
    }

    pub fn u_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(1, 2, &self.u)
    }
}

/// The Y-junction checklist C1Y–C7Y.
///
/// C7Y is evaluated in its usual form, `U (1/c)₊ = 1/c₋`. Differentiating the trace
/// relation `u₊ = a u₋` along the wave gives `a U (1/c)₊ = 1/c₋` instead; this
/// is reported as the non-gating entry C7Ya, and
/// [`verify_vertex_numerically`] shows which of the two the vertex actually
/// needs.
pub fn check_yjunction(spec: &YJunctionSpec, tol: f64) -> Result<ConditionReport, CouplingError> {
    if !(spec.a != 0.0 && spec.a.is_finite()) {
        return Err(CouplingError::Precondition(format!(
            "jump ratio a must be finite and nonzero, got {}",
            spec.a
        )));
    }
    let g = spec.graph();
    let u = spec.u_matrix();
    check_u(&g, &u, tol)?;
    let a = spec.a;
    let m = spec.minus;
    let [p1, p2] = spec.plus;
    let params: Vec<(EdgeRef, EdgeParams)> = g.edges().map(|(e, p)| (e, *p)).collect();
    let refs: Vec<EdgeRef> = params.iter().map(|(e, _)| *e).collect();
    let values = |f: fn(&EdgeParams) -> f64| params.iter().map(|(_, p)| f(p)).collect::<Vec<_>>();

    let amplitude = [
        a * m.margin() / m.gamma,
        p1.margin() / p1.gamma,
        p2.margin() / p2.gamma,
    ];
    let flux =
        m.alpha / (m.c * m.c) - a * a * (p1.alpha / (p1.c * p1.c) + p2.alpha / (p2.c * p2.c));
    let drift = m.beta - a * a * (p1.beta + p2.beta);

    let conditions = vec![
        positivity_entry("C1Y", "beta + c > 0 on all three edges", &params, tol),
        equality_entry(
            "C2Y",
            "y0 / c equal on all edges",
            &values(|p| p.y0 / p.c),
            &refs,
            tol,
        ),
        equality_entry(
            "C3Y",
            "sqrt((beta + c) / alpha) * c equal on all edges",
            &values(width_speed),
            &refs,
            tol,
        ),
        equality_entry(
            "C4Y",
            "a (beta_- + c_-) / gamma_- = (beta_+j + c_+j) / gamma_+j",
            &amplitude,
            &refs,
            tol,
        ),
        ConditionEntry::new(
            "C5Y",
            "alpha_- / c_-^2 = a^2 sum_j alpha_+j / c_+j^2",
            flux.abs(),
            flux.abs() <= tol,
        ),
        ConditionEntry::new(
            "C6Y",
            "beta_- = a^2 sum_j beta_+j",
            drift.abs(),
            drift.abs() <= tol,
        ),
        speed_mapping_entry("C7Y", "U (1/c)_+ = 1/c_-", &g, &u, 1.0, tol),
        speed_mapping_entry(
            "C7Ya",
            "a U (1/c)_+ = 1/c_- (derivative relation along the wave)",
            &g,
            &u,
            a,
            tol,
        )
        .advisory(),
    ];
    Ok(ConditionReport::new("y-junction", tol, conditions, || {
        profiles_of(&g)
    }))
}
