use nalgebra::DVector;
use serde::Serialize;

use super::CouplingError;
use crate::graph::StarGraph;
use crate::io::serialize_f64;
use crate::krein::YUCoupling;
use crate::soliton::SolitonProfile;

/// `(u, ∂x u, ∂x² u)` of one edge at the vertex.
pub type BoundaryTrace = [f64; 3];

/// Vertex-condition residuals, one per coupling row.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct VertexResiduals {
    /// Distance of the trace vector to `Y`.
    #[serde(serialize_with = "serialize_f64")]
    pub trace_to_y: f64,
    /// Distance of the flux vector `(-α₋ u₋'' + β₋ u₋/2, α₊ u₊'' − β₊ u₊/2)`
    /// to `Y⊥`.
    #[serde(serialize_with = "serialize_f64")]
    pub flux_to_y_perp: f64,
    /// `|∂x u(0−) − U ∂x u(0+)|`.
    #[serde(serialize_with = "serialize_f64")]
    pub derivative_relation: f64,
}

impl VertexResiduals {
    pub fn max(&self) -> f64 {
        self.trace_to_y
            .max(self.flux_to_y_perp)
            .max(self.derivative_relation)
    }

    /// Componentwise maximum.
    pub fn merge(self, o: Self) -> Self {
        Self {
            trace_to_y: self.trace_to_y.max(o.trace_to_y),
            flux_to_y_perp: self.flux_to_y_perp.max(o.flux_to_y_perp),
            derivative_relation: self.derivative_relation.max(o.derivative_relation),
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [
            self.trace_to_y,
            self.flux_to_y_perp,
            self.derivative_relation,
        ]
    }
}

/// Residuals of the `(Y, U)` conditions for boundary data given per edge in
/// graph order.
pub fn vertex_residuals(
    g: &StarGraph,
    yu: &YUCoupling,
    traces: &[BoundaryTrace],
) -> VertexResiduals {
    let nm = g.n_minus();
    let n = g.len();
    debug_assert_eq!(traces.len(), n);
    let trace = DVector::from_iterator(n, traces.iter().map(|t| t[0]));
    let flux = DVector::from_iterator(
        n,
        g.edges().zip(traces).enumerate().map(|(k, ((_, p), t))| {
            let w = -p.alpha * t[2] + 0.5 * p.beta * t[0];
            if k < nm {
                w
            } else {
                -w
            }
        }),
    );
    let d_minus = DVector::from_iterator(nm, traces[..nm].iter().map(|t| t[1]));
    let d_plus = DVector::from_iterator(n - nm, traces[nm..].iter().map(|t| t[1]));
    VertexResiduals {
        trace_to_y: yu.distance_to_y(&trace),
        flux_to_y_perp: yu.distance_to_y_perp(&flux),
        derivative_relation: (d_minus - yu.u() * d_plus).norm(),
    }
}

/// Evaluates the vertex conditions on the closed-form travelling waves
/// `u_e(t, x) = φ_e(x − c_e t)` at each sample time and returns the maximum
/// of each row. `profiles` are in graph order.
pub fn verify_vertex_numerically(
    g: &StarGraph,
    yu: &YUCoupling,
    profiles: &[SolitonProfile],
    times: &[f64],
) -> Result<VertexResiduals, CouplingError> {
    if profiles.len() != g.len() || yu.n_minus() != g.n_minus() || yu.n_plus() != g.n_plus() {
        return Err(CouplingError::Dimension(format!(
            "{} profiles and a {}x{} coupling for a graph with {} + {} edges",
            profiles.len(),
            yu.n_minus(),
            yu.n_plus(),
            g.n_minus(),
            g.n_plus()
        )));
    }
    let mut worst = VertexResiduals::default();
    let mut traces = vec![[0.0; 3]; profiles.len()];
    for &t in times {
        for (tr, p) in traces.iter_mut().zip(profiles) {
            let d = p.derivatives(-p.speed() * t);
            *tr = [d[0], d[1], d[2]];
        }
        worst = worst.merge(vertex_residuals(g, yu, &traces));
    }
    Ok(worst)
}
