//! Star graphs with per-edge KdV coefficients.
//!
//! Edges are identified by position: `minus[i]` is the `i`-th incoming edge,
//! `plus[j]` the `j`-th outgoing one. Every vector indexed by edges elsewhere in
//! the crate uses the order "all incoming edges, then all outgoing edges".

mod file;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use file::{load_config, load_graph, CouplingKind, CouplingSpec, GraphConfig, GraphError};

/// Coefficients and wave data carried by one edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeParams {
    /// Dispersion coefficient, must be positive.
    pub alpha: f64,
    /// Transport coefficient.
    pub beta: f64,
    /// Nonlinearity coefficient, must be nonzero.
    pub gamma: f64,
    /// Wave speed, must be nonzero.
    pub c: f64,
    /// Phase offset of the profile peak.
    #[serde(default)]
    pub y0: f64,
}

impl EdgeParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64, c: f64, y0: f64) -> Self {
        Self {
            alpha,
            beta,
            gamma,
            c,
            y0,
        }
    }

    /// `β + c`, positive exactly when the edge carries a solitary wave.
    pub fn margin(&self) -> f64 {
        self.beta + self.c
    }
}

/// Which half-line an edge is parametrized by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Orientation {
    /// `(-∞, 0)`, the edge ends at the vertex.
    Incoming,
    /// `(0, ∞)`, the edge starts at the vertex.
    Outgoing,
}

/// Positional edge identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeRef {
    pub side: Orientation,
    pub index: usize,
}

impl EdgeRef {
    pub fn minus(index: usize) -> Self {
        Self {
            side: Orientation::Incoming,
            index,
        }
    }

    pub fn plus(index: usize) -> Self {
        Self {
            side: Orientation::Outgoing,
            index,
        }
    }
}

impl fmt::Display for EdgeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.side {
            Orientation::Incoming => write!(f, "minus[{}]", self.index),
            Orientation::Outgoing => write!(f, "plus[{}]", self.index),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub params: EdgeParams,
    pub label: Option<String>,
}

impl From<EdgeParams> for Edge {
    fn from(params: EdgeParams) -> Self {
        Self {
            params,
            label: None,
        }
    }
}

/// A metric star graph: finitely many half-lines glued at one vertex.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StarGraph {
    pub minus: Vec<Edge>,
    pub plus: Vec<Edge>,
}

impl StarGraph {
    pub fn new(minus: Vec<EdgeParams>, plus: Vec<EdgeParams>) -> Self {
        Self {
            minus: minus.into_iter().map(Edge::from).collect(),
            plus: plus.into_iter().map(Edge::from).collect(),
        }
    }

    /// `n_minus` incoming and `n_plus` outgoing copies of the same edge.
    pub fn uniform(p: EdgeParams, n_minus: usize, n_plus: usize) -> Self {
        Self::new(vec![p; n_minus], vec![p; n_plus])
    }

    pub fn n_minus(&self) -> usize {
        self.minus.len()
    }

    pub fn n_plus(&self) -> usize {
        self.plus.len()
    }

    pub fn len(&self) -> usize {
        self.minus.len() + self.plus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_balanced(&self) -> bool {
        self.n_minus() == self.n_plus()
    }

    /// Edge at global position `k` (incoming edges first).
    pub fn edge_ref(&self, k: usize) -> EdgeRef {
        if k < self.n_minus() {
            EdgeRef::minus(k)
        } else {
            EdgeRef::plus(k - self.n_minus())
        }
    }

    /// Global position of an edge (incoming edges first).
    pub fn position(&self, e: EdgeRef) -> usize {
        match e.side {
            Orientation::Incoming => e.index,
            Orientation::Outgoing => self.n_minus() + e.index,
        }
    }

    pub fn edge(&self, e: EdgeRef) -> &Edge {
        match e.side {
            Orientation::Incoming => &self.minus[e.index],
            Orientation::Outgoing => &self.plus[e.index],
        }
    }

    pub fn params(&self, e: EdgeRef) -> &EdgeParams {
        &self.edge(e).params
    }

    pub fn params_mut(&mut self, e: EdgeRef) -> &mut EdgeParams {
        match e.side {
            Orientation::Incoming => &mut self.minus[e.index].params,
            Orientation::Outgoing => &mut self.plus[e.index].params,
        }
    }

    /// All edges in global order.
    pub fn edges(&self) -> impl Iterator<Item = (EdgeRef, &EdgeParams)> + '_ {
        let minus = self
            .minus
            .iter()
            .enumerate()
            .map(|(i, e)| (EdgeRef::minus(i), &e.params));
        let plus = self
            .plus
            .iter()
            .enumerate()
            .map(|(j, e)| (EdgeRef::plus(j), &e.params));
        minus.chain(plus)
    }

    pub fn side(&self, side: Orientation) -> impl Iterator<Item = &EdgeParams> + '_ {
        let edges = match side {
            Orientation::Incoming => &self.minus,
            Orientation::Outgoing => &self.plus,
        };
        edges.iter().map(|e| &e.params)
    }

    pub fn alphas(&self, side: Orientation) -> Vec<f64> {
        self.side(side).map(|p| p.alpha).collect()
    }

    pub fn betas(&self, side: Orientation) -> Vec<f64> {
        self.side(side).map(|p| p.beta).collect()
    }

    pub fn max_alpha(&self) -> f64 {
        self.edges().map(|(_, p)| p.alpha).fold(0.0, f64::max)
    }
}

/// Field of [`EdgeParams`] named by a violation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    Alpha,
    Beta,
    Gamma,
    C,
    Y0,
    Graph,
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Field::Alpha => "alpha",
            Field::Beta => "beta",
            Field::Gamma => "gamma",
            Field::C => "c",
            Field::Y0 => "y0",
            Field::Graph => "graph",
        };
        f.write_str(s)
    }
}

/// One broken invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    /// `None` for graph-level violations.
    pub edge: Option<EdgeRef>,
    pub field: Field,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.edge {
            Some(e) => write!(f, "{} at edge {}: {}", self.field, e, self.message),
            None => write!(f, "{}: {}", self.field, self.message),
        }
    }
}

/// Lists every broken invariant; an empty list means the graph is valid.
pub fn validate_graph(g: &StarGraph) -> Vec<Violation> {
    let mut out = Vec::new();
    if g.is_empty() {
        out.push(Violation {
            edge: None,
            field: Field::Graph,
            message: "graph has no edges".into(),
        });
    }
    for (e, p) in g.edges() {
        let mut push = |field, message: &str| {
            out.push(Violation {
                edge: Some(e),
                field,
                message: message.to_string(),
            })
        };
        for (field, v) in [
            (Field::Alpha, p.alpha),
            (Field::Beta, p.beta),
            (Field::Gamma, p.gamma),
            (Field::C, p.c),
            (Field::Y0, p.y0),
        ] {
            if !v.is_finite() {
                push(field, "not finite");
            }
        }
        if !(p.alpha > 0.0) && !p.alpha.is_nan() {
            push(Field::Alpha, "alpha nonpositive");
        }
        if p.gamma == 0.0 {
            push(Field::Gamma, "gamma zero");
        }
        if p.c == 0.0 {
            push(Field::C, "wave speed zero");
        }
    }
    out
}
