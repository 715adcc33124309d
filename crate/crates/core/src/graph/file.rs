//! TOML graph files.
//!
//! ```toml
//! tolerance = 1e-10
//!
//! [[edges_minus]]
//! alpha = 1.0
//! beta = 0.0
//! gamma = -6.0
//! c = 1.0
//! y0 = 0.0
//! label = "inlet"
//!
//! [[edges_plus]]
//! alpha = 1.0
//! beta = 0.0
//! gamma = -6.0
//! c = 1.0
//! y0 = 0.0
//!
//! [coupling]
//! kind = "continuity"      # or "y-junction" together with `a = ...`
//! U = [1.0]                # row-major, |E-| rows and |E+| columns
//! ```
//!
//! Unknown top-level tables are ignored so front ends can keep their own
//! settings in the same file.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{validate_graph, Edge, EdgeParams, StarGraph, Violation};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeEntry {
    alpha: f64,
    beta: f64,
    gamma: f64,
    c: f64,
    #[serde(default)]
    y0: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
}

impl From<EdgeEntry> for Edge {
    fn from(e: EdgeEntry) -> Self {
        Edge {
            params: EdgeParams::new(e.alpha, e.beta, e.gamma, e.c, e.y0),
            label: e.label,
        }
    }
}

impl From<&Edge> for EdgeEntry {
    fn from(e: &Edge) -> Self {
        let p = e.params;
        EdgeEntry {
            alpha: p.alpha,
            beta: p.beta,
            gamma: p.gamma,
            c: p.c,
            y0: p.y0,
            label: e.label.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CouplingKind {
    /// `Y = span(1)`.
    Continuity,
    /// `Y = span{(1, a, a)}` on a one-in/two-out graph.
    YJunction,
}

/// Vertex coupling as written in a graph file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingSpec {
    pub kind: CouplingKind,
    /// Jump ratio, required for `y-junction`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    /// Row-major `|E-| x |E+|` matrix.
    #[serde(rename = "U")]
    pub u: Vec<f64>,
}

impl CouplingSpec {
    /// `U` as a dense matrix, checking its length against the graph shape.
    pub fn u_matrix(&self, g: &StarGraph) -> Result<nalgebra::DMatrix<f64>, GraphError> {
        let (rows, cols) = (g.n_minus(), g.n_plus());
        if self.u.len() != rows * cols {
            return Err(GraphError::Coupling(format!(
                "U has {} entries, expected {rows}x{cols} = {}",
                self.u.len(),
                rows * cols
            )));
        }
        Ok(nalgebra::DMatrix::from_row_slice(rows, cols, &self.u))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct GraphFile {
    #[serde(default)]
    edges_minus: Vec<EdgeEntry>,
    #[serde(default)]
    edges_plus: Vec<EdgeEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    coupling: Option<CouplingSpec>,
}

/// Everything a graph file determines.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphConfig {
    pub graph: StarGraph,
    pub coupling: Option<CouplingSpec>,
    pub tolerance: Option<f64>,
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("parse error{}: {message}", fmt_locus(*.line, *.column))]
    Parse {
        line: Option<usize>,
        column: Option<usize>,
        message: String,
    },
    #[error("invalid graph: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
    #[error("invalid coupling: {0}")]
    Coupling(String),
}

fn fmt_locus(line: Option<usize>, column: Option<usize>) -> String {
    match (line, column) {
        (Some(l), Some(c)) => format!(" at line {l}, column {c}"),
        (Some(l), None) => format!(" at line {l}"),
        _ => String::new(),
    }
}

fn parse_error(src: &str, err: toml::de::Error) -> GraphError {
    let (line, column) = match err.span() {
        Some(span) => {
            let before = &src[..span.start.min(src.len())];
            let line = before.matches('\n').count() + 1;
            let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
            (Some(line), Some(column))
        }
        None => (None, None),
    };
    GraphError::Parse {
        line,
        column,
        message: err.message().trim().to_string(),
    }
}

/// Parses a full graph file and validates the graph.
pub fn load_config(src: &str) -> Result<GraphConfig, GraphError> {
    let file: GraphFile = toml::from_str(src).map_err(|e| parse_error(src, e))?;
    let graph = StarGraph {
        minus: file.edges_minus.into_iter().map(Edge::from).collect(),
        plus: file.edges_plus.into_iter().map(Edge::from).collect(),
    };
    let violations = validate_graph(&graph);
    if !violations.is_empty() {
        return Err(GraphError::Invalid(violations));
    }
    if let Some(t) = file.tolerance {
        if !(t > 0.0) {
            return Err(GraphError::Coupling(format!(
                "tolerance must be positive, got {t}"
            )));
        }
    }
    if let Some(spec) = &file.coupling {
        spec.u_matrix(&graph)?;
        if spec.kind == CouplingKind::YJunction && spec.a.is_none() {
            return Err(GraphError::Coupling("y-junction coupling needs `a`".into()));
        }
    }
    Ok(GraphConfig {
        graph,
        coupling: file.coupling,
        tolerance: file.tolerance,
    })
}

/// Parses and validates the graph part of a graph file.
pub fn load_graph(src: &str) -> Result<StarGraph, GraphError> {
    load_config(src).map(|c| c.graph)
}

impl GraphConfig {
    pub fn to_toml(&self) -> String {
        let file = GraphFile {
            edges_minus: self.graph.minus.iter().map(EdgeEntry::from).collect(),
            edges_plus: self.graph.plus.iter().map(EdgeEntry::from).collect(),
            tolerance: self.tolerance,
            coupling: self.coupling.clone(),
        };
        toml::to_string(&file).expect("graph files always serialize")
    }
}

impl StarGraph {
    /// Lossless TOML form of the graph alone.
    pub fn to_toml(&self) -> String {
        GraphConfig {
            graph: self.clone(),
            coupling: None,
            tolerance: None,
        }
        .to_toml()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{EdgeRef, Field};
    use proptest::prelude::*;

    const TWO_EDGE: &str = r#"
tolerance = 1e-10

[[edges_minus]]
alpha = 1.0
beta = 0.0
gamma = -6.0
c = 1.0
y0 = 0.0
label = "left"

[[edges_plus]]
alpha = 1.0
beta = 0.0
gamma = -6.0
c = 1.0
y0 = 0.0

[coupling]
kind = "continuity"
U = [1.0]
"#;

    #[test]
    fn minimal_two_edge_file() {
        let cfg = load_config(TWO_EDGE).unwrap();
        assert_eq!(cfg.graph.n_minus(), 1);
        assert_eq!(cfg.graph.n_plus(), 1);
        assert_eq!(cfg.graph.minus[0].label.as_deref(), Some("left"));
        assert_eq!(cfg.tolerance, Some(1e-10));
        let spec = cfg.coupling.unwrap();
        assert_eq!(spec.kind, CouplingKind::Continuity);
        assert_eq!(spec.u_matrix(&cfg.graph).unwrap()[(0, 0)], 1.0);
    }

    #[test]
    fn missing_gamma_is_a_parse_error() {
        let src = TWO_EDGE.replacen("gamma = -6.0\n", "", 1);
        let err = load_graph(&src).unwrap_err();
        match err {
            GraphError::Parse { line, message, .. } => {
                assert!(message.contains("gamma"), "{message}");
                assert!(line.is_some());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_text_reports_line() {
        let err = load_graph("[[edges_minus]]\nalpha = = 1\n").unwrap_err();
        match err {
            GraphError::Parse { line, .. } => assert_eq!(line, Some(2)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn y_junction_file_has_three_edges() {
        let src = r#"
[[edges_minus]]
alpha = 1.0
beta = 0.0
gamma = -6.0
c = 1.0
[[edges_plus]]
alpha = 1.0
beta = 0.0
gamma = -8.485281374238571
c = 1.0
[[edges_plus]]
alpha = 1.0
beta = 0.0
gamma = -8.485281374238571
c = 1.0
[coupling]
kind = "y-junction"
a = 0.7071067811865476
U = [0.5, 0.5]
"#;
        let cfg = load_config(src).unwrap();
        assert_eq!(cfg.graph.len(), 3);
        assert_eq!(cfg.graph.n_plus(), 2);
        assert_eq!(
            cfg.coupling.unwrap().a,
            Some(std::f64::consts::FRAC_1_SQRT_2)
        );
    }

    #[test]
    fn invalid_edge_is_a_validation_error() {
        let src = TWO_EDGE.replacen("alpha = 1.0", "alpha = 0.0", 1);
        match load_graph(&src).unwrap_err() {
            GraphError::Invalid(v) => {
                assert_eq!(v[0].edge, Some(EdgeRef::minus(0)));
                assert_eq!(v[0].field, Field::Alpha);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn coupling_shape_is_checked() {
        let src = TWO_EDGE.replace("U = [1.0]", "U = [1.0, 0.0]");
        assert!(matches!(load_config(&src), Err(GraphError::Coupling(_))));
        let src = TWO_EDGE.replace("\"continuity\"", "\"y-junction\"");
        assert!(matches!(load_config(&src), Err(GraphError::Coupling(_))));
    }

    fn finite() -> impl Strategy<Value = f64> {
        prop_oneof![-1e6..1e6f64, -1.0..1.0f64, Just(0.5), Just(-6.0)]
    }

    fn edge() -> impl Strategy<Value = Edge> {
        (
            1e-3..1e3f64,
            finite(),
            finite().prop_filter("gamma", |g| *g != 0.0),
            finite().prop_filter("c", |c| *c != 0.0),
            finite(),
            proptest::option::of("[a-z]{1,6}"),
        )
            .prop_map(|(alpha, beta, gamma, c, y0, label)| Edge {
                params: EdgeParams::new(alpha, beta, gamma, c, y0),
                label,
            })
    }

    proptest! {
        #[test]
        fn serialization_round_trips(
            minus in proptest::collection::vec(edge(), 0..4),
            plus in proptest::collection::vec(edge(), 1..4),
        ) {
            let g = StarGraph { minus, plus };
            let back = load_graph(&g.to_toml()).unwrap();
            prop_assert_eq!(back, g);
        }

        #[test]
        fn validation_is_total(
            vals in proptest::collection::vec(
                prop_oneof![any::<f64>(), Just(0.0), Just(f64::NAN), Just(f64::INFINITY)], 5)
        ) {
            let p = EdgeParams::new(vals[0], vals[1], vals[2], vals[3], vals[4]);
            let _ = validate_graph(&StarGraph::new(vec![p], vec![p]));
        }
    }
}
