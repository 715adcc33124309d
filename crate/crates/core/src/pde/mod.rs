//! Method-of-lines KdV solver on a truncated star graph.
//!
//! Each edge is cut at distance `L` from the vertex and sampled at spacing
//! `h`. Interior nodes use second-order central differences,
//!
//! ```text
//! D1 u_i = (u_{i+1} - u_{i-1}) / 2h
//! D3 u_i = (u_{i+2} - 2u_{i+1} + 2u_{i-1} - u_{i-2}) / 2h³
//! ```
//!
//! and the nonlinear term in the split form `(γ/3)(u D1u + D1(u²))`, which
//! equals `γ u ∂x u` for smooth `u`. Far ends are closed by zero ghosts; the
//! vertex ghosts come from the coupling system in [`vertex`], which keeps the
//! linear part energy-conserving. Time stepping
//! is classical RK4 under `dt ≤ C h³ / max α`.

mod study;
mod vertex;

use serde::Serialize;
use thiserror::Error;

use crate::coupling::{vertex_residuals, BoundaryTrace, VertexResiduals};
use crate::graph::StarGraph;
use crate::io::serialize_f64;
use crate::krein::YUCoupling;
use crate::soliton::SolitonProfile;

pub use study::{convergence_study, observed_orders, ConvergenceStudy, GridResult};

use vertex::VertexSystem;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PdeError {
    #[error("invalid discretization: {0}")]
    Discretization(String),
    #[error("time step {dt} exceeds the stability bound {bound} = {c_stab} h^3 / max alpha")]
    Unstable { dt: f64, bound: f64, c_stab: f64 },
    #[error("vertex coupling system is singular (rank {rank} of {size})")]
    SingularVertex { rank: usize, size: usize },
    #[error("setup: {0}")]
    Setup(String),
    #[error("blow-up at t = {t}: max |u| = {max_abs} exceeds {limit}")]
    BlowUp {
        t: f64,
        max_abs: f64,
        limit: f64,
        /// Last field that passed the guard.
        last_stable: Box<GraphField>,
        diagnostics: Vec<Diagnostic>,
    },
}

/// Uniform grid on every edge plus the time step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Discretization {
    #[serde(serialize_with = "serialize_f64")]
    pub length: f64,
    #[serde(serialize_with = "serialize_f64")]
    pub h: f64,
    #[serde(serialize_with = "serialize_f64")]
    pub dt: f64,
    #[serde(serialize_with = "serialize_f64")]
    pub c_stab: f64,
    /// Cells per edge, `length / h`.
    pub cells: usize,
}

/// Default `C` in `dt ≤ C h³ / max α`. RK4 on the central third-derivative
/// stencil is stable up to about `2.17`.
pub const DEFAULT_C_STAB: f64 = 1.0;

impl Discretization {
    pub fn new(
        length: f64,
        h: f64,
        dt: f64,
        c_stab: f64,
        alpha_max: f64,
    ) -> Result<Self, PdeError> {
        if !(length > 0.0 && h > 0.0 && dt > 0.0 && c_stab > 0.0 && alpha_max > 0.0) {
            return Err(PdeError::Discretization(format!(
                "need positive length, h, dt, c_stab and alpha (got {length}, {h}, {dt}, {c_stab}, {alpha_max})"
            )));
        }
        let ratio = length / h;
        let cells = ratio.round();
        if (ratio - cells).abs() > 1e-9 * ratio.max(1.0) {
            return Err(PdeError::Discretization(format!(
                "length / h = {ratio} is not an integer"
            )));
        }
        if cells < 4.0 {
            return Err(PdeError::Discretization(
                "need at least 4 cells per edge".into(),
            ));
        }
        let bound = c_stab * h * h * h / alpha_max;
        if dt > bound * (1.0 + 1e-12) {
            return Err(PdeError::Unstable { dt, bound, c_stab });
        }
        Ok(Self {
            length,
            h,
            dt,
            c_stab,
            cells: cells as usize,
        })
    }

    /// `dt = c_stab h³ / alpha_max`.
    pub fn at_bound(length: f64, h: f64, c_stab: f64, alpha_max: f64) -> Result<Self, PdeError> {
        Self::new(length, h, c_stab * h * h * h / alpha_max, c_stab, alpha_max)
    }

    /// Nodes per edge, vertex and far end included.
    pub fn nodes(&self) -> usize {
        self.cells + 1
    }
}

/// Samples of `u` on every edge, in graph order. `values[e][k]` is the value
/// at distance `k h` from the vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphField {
    pub t: f64,
    pub values: Vec<Vec<f64>>,
}

impl GraphField {
    pub fn zeros(g: &StarGraph, disc: &Discretization) -> Self {
        Self {
            t: 0.0,
            values: vec![vec![0.0; disc.nodes()]; g.len()],
        }
    }

    /// The travelling waves `φ_e(x − c_e t)` sampled at time `t`.
    pub fn from_profiles(
        g: &StarGraph,
        disc: &Discretization,
        profiles: &[SolitonProfile],
        t: f64,
    ) -> Self {
        let values = g
            .edges()
            .zip(profiles)
            .map(|((e, _), p)| {
                let s = sign(e.side);
                (0..disc.nodes())
                    .map(|k| p.travelling_wave(t, s * k as f64 * disc.h))
                    .collect()
            })
            .collect();
        Self { t, values }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().flatten().fold(
            0.0,
            |m: f64, v| if v.is_nan() { f64::NAN } else { m.max(v.abs()) },
        )
    }

    /// Rows `(edge index, x, u)` for table output.
    pub fn rows<'a>(&'a self, g: &'a StarGraph, h: f64) -> impl Iterator<Item = [f64; 3]> + 'a {
        g.edges()
            .zip(&self.values)
            .enumerate()
            .flat_map(move |(i, ((e, _), v))| {
                let s = sign(e.side);
                v.iter()
                    .enumerate()
                    .map(move |(k, u)| [i as f64, s * k as f64 * h, *u])
            })
    }
}

fn sign(side: crate::graph::Orientation) -> f64 {
    match side {
        crate::graph::Orientation::Incoming => -1.0,
        crate::graph::Orientation::Outgoing => 1.0,
    }
}

/// One output frame's diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Diagnostic {
    #[serde(serialize_with = "serialize_f64")]
    pub t: f64,
    /// Relative L² error against the reference wave, when one is given.
    #[serde(serialize_with = "crate::io::serialize_opt_f64")]
    pub rel_l2_error: Option<f64>,
    pub vertex: VertexResiduals,
    #[serde(serialize_with = "serialize_f64")]
    pub max_abs: f64,
}

/// A graph, its coupling and a grid, ready to integrate.
#[derive(Debug, Clone)]
pub struct Simulation {
    graph: StarGraph,
    coupling: YUCoupling,
    disc: Discretization,
    vertex: VertexSystem,
}

impl Simulation {
    pub fn new(
        graph: &StarGraph,
        coupling: &YUCoupling,
        disc: Discretization,
    ) -> Result<Self, PdeError> {
        let bound = disc.c_stab * disc.h.powi(3) / graph.max_alpha();
        if disc.dt > bound * (1.0 + 1e-12) {
            return Err(PdeError::Unstable {
                dt: disc.dt,
                bound,
                c_stab: disc.c_stab,
            });
        }
        let vertex = VertexSystem::new(graph, coupling, disc.h)?;
        Ok(Self {
            graph: graph.clone(),
            coupling: coupling.clone(),
            disc,
            vertex,
        })
    }

    pub fn graph(&self) -> &StarGraph {
        &self.graph
    }

    pub fn discretization(&self) -> &Discretization {
        &self.disc
    }

    fn check_field(&self, f: &GraphField) -> Result<(), PdeError> {
        if f.values.len() != self.graph.len()
            || f.values.iter().any(|v| v.len() != self.disc.nodes())
        {
            return Err(PdeError::Setup("field does not match the grid".into()));
        }
        Ok(())
    }

    /// Vertex ghosts `[g1, g2]` per edge for the field.
    pub fn enforce_vertex(&self, values: &[Vec<f64>]) -> Result<Vec<[f64; 2]>, PdeError> {
        let near: Vec<[f64; 4]> = values.iter().map(|v| [v[0], v[1], v[2], v[3]]).collect();
        self.vertex.solve(&near)
    }

    /// `∂t u` of the semi-discrete system.
    pub fn semidiscrete_rhs(&self, field: &GraphField) -> Result<Vec<Vec<f64>>, PdeError> {
        self.check_field(field)?;
        let mut out: Vec<Vec<f64>> = field.values.iter().map(|v| vec![0.0; v.len()]).collect();
        self.rhs_into(&field.values, &mut out)?;
        Ok(out)
    }

    fn rhs_into(&self, values: &[Vec<f64>], out: &mut [Vec<f64>]) -> Result<(), PdeError> {
        let ghosts = self.enforce_vertex(values)?;
        let h = self.disc.h;
        let inv2h = 0.5 / h;
        let inv2h3 = 0.5 / (h * h * h);
        for (e, ((_, p), (v, du))) in self
            .graph
            .edges()
            .zip(values.iter().zip(out.iter_mut()))
            .enumerate()
        {
            let s = self.vertex.sigma(e);
            let n = v.len();
            let [g1, g2] = ghosts[e];
            let get = |k: isize| -> f64 {
                match k {
                    -2 => g2,
                    -1 => g1,
                    k if k as usize >= n => 0.0,
                    k => v[k as usize],
                }
            };
            let a = -p.alpha * s * inv2h3;
            let b = p.beta * s * inv2h;
            let nl = p.gamma * s * inv2h / 3.0;
            let node = |k: isize| -> f64 {
                let (m2, m1, c, p1, p2) = (get(k - 2), get(k - 1), get(k), get(k + 1), get(k + 2));
                let d3 = p2 - 2.0 * p1 + 2.0 * m1 - m2;
                let d1 = p1 - m1;
                let nonlinear = if k == 0 {
                    // advective form at the vertex keeps the ghost system linear
                    3.0 * c * d1
                } else {
                    c * d1 + (p1 * p1 - m1 * m1)
                };
                a * d3 + b * d1 + nl * nonlinear
            };
            for k in [0, 1] {
                du[k] = node(k as isize);
            }
            for k in 2..n - 2 {
                let (m2, m1, c, p1, p2) = (v[k - 2], v[k - 1], v[k], v[k + 1], v[k + 2]);
                du[k] = a * (p2 - 2.0 * p1 + 2.0 * m1 - m2)
                    + b * (p1 - m1)
                    + nl * (c * (p1 - m1) + (p1 * p1 - m1 * m1));
            }
            for k in [n - 2, n - 1] {
                du[k] = node(k as isize);
            }
        }
        Ok(())
    }

    /// `(u, ∂x u, ∂x² u)` at the vertex per edge, from one-sided
    /// second-order stencils on the stored nodes only.
    pub fn boundary_traces(&self, values: &[Vec<f64>]) -> Vec<BoundaryTrace> {
        let h = self.disc.h;
        values
            .iter()
            .enumerate()
            .map(|(e, v)| {
                let s = self.vertex.sigma(e);
                let d1 = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
                let d2 = (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / (h * h);
                [v[0], s * d1, d2]
            })
            .collect()
    }

    pub fn vertex_residuals(&self, values: &[Vec<f64>]) -> VertexResiduals {
        vertex_residuals(&self.graph, &self.coupling, &self.boundary_traces(values))
    }

    /// `sqrt(Σ h (u − φ)²) / sqrt(Σ h φ²)` against the travelling waves.
    pub fn relative_l2_error(&self, field: &GraphField, profiles: &[SolitonProfile]) -> f64 {
        let exact = GraphField::from_profiles(&self.graph, &self.disc, profiles, field.t);
        let (mut num, mut den) = (0.0, 0.0);
        for (u, w) in field.values.iter().zip(&exact.values) {
            for (a, b) in u.iter().zip(w) {
                num += (a - b) * (a - b);
                den += b * b;
            }
        }
        if den == 0.0 {
            num.sqrt()
        } else {
            (num / den).sqrt()
        }
    }

    fn diagnose(&self, field: &GraphField, reference: Option<&[SolitonProfile]>) -> Diagnostic {
        Diagnostic {
            t: field.t,
            rel_l2_error: reference.map(|r| self.relative_l2_error(field, r)),
            vertex: self.vertex_residuals(&field.values),
            max_abs: field.max_abs(),
        }
    }

    /// Integrates to `t_final` with RK4. The step is shortened so that
    /// `t_final` and the frame times are hit exactly.
    pub fn evolve(
        &self,
        initial: GraphField,
        t_final: f64,
        opts: &EvolveOptions,
    ) -> Result<Evolution, PdeError> {
        self.check_field(&initial)?;
        if !(t_final >= initial.t) {
            return Err(PdeError::Setup(format!(
                "final time {t_final} precedes t = {}",
                initial.t
            )));
        }
        let frames_n = opts.frames.max(1);
        let span = t_final - initial.t;
        let steps_per_frame = ((span / frames_n as f64) / self.disc.dt).ceil().max(1.0) as usize;
        let total = if span == 0.0 {
            0
        } else {
            steps_per_frame * frames_n
        };
        let dt = if total == 0 { 0.0 } else { span / total as f64 };

        let limit = opts.blowup_factor * initial.max_abs();
        let reference = opts.reference.as_deref();
        let mut field = initial;
        let t0 = field.t;
        let mut frames = if opts.keep_frames {
            vec![field.clone()]
        } else {
            Vec::new()
        };
        let mut diagnostics = vec![self.diagnose(&field, reference)];
        let mut peak = VertexResiduals::default();

        let shape: Vec<Vec<f64>> = field.values.iter().map(|v| vec![0.0; v.len()]).collect();
        let (mut k1, mut k2, mut k3, mut k4, mut tmp) = (
            shape.clone(),
            shape.clone(),
            shape.clone(),
            shape.clone(),
            shape,
        );
        let mut last_stable = field.clone();

        for step in 1..=total {
            self.rhs_into(&field.values, &mut k1)?;
            axpy_into(&mut tmp, &field.values, 0.5 * dt, &k1);
            self.rhs_into(&tmp, &mut k2)?;
            axpy_into(&mut tmp, &field.values, 0.5 * dt, &k2);
            self.rhs_into(&tmp, &mut k3)?;
            axpy_into(&mut tmp, &field.values, dt, &k3);
            self.rhs_into(&tmp, &mut k4)?;
            for e in 0..field.values.len() {
                let u = &mut field.values[e];
                for i in 0..u.len() {
                    u[i] += dt / 6.0 * (k1[e][i] + 2.0 * (k2[e][i] + k3[e][i]) + k4[e][i]);
                }
            }
            field.t = t0 + step as f64 * dt;

            let m = field.max_abs();
            if !m.is_finite() || m > limit {
                diagnostics.push(self.diagnose(&field, reference));
                return Err(PdeError::BlowUp {
                    t: field.t,
                    max_abs: m,
                    limit,
                    last_stable: Box::new(last_stable),
                    diagnostics,
                });
            }
            if opts.track_vertex_every > 0 && step % opts.track_vertex_every == 0 {
                peak = peak.merge(self.vertex_residuals(&field.values));
            }
            if step % steps_per_frame == 0 {
                let d = self.diagnose(&field, reference);
                peak = peak.merge(d.vertex);
                diagnostics.push(d);
                if opts.keep_frames {
                    frames.push(field.clone());
                }
                last_stable = field.clone();
            }
        }
        peak = peak.merge(diagnostics[0].vertex);
        Ok(Evolution {
            final_field: field,
            frames,
            diagnostics,
            peak_vertex: peak,
            steps: total,
            dt,
        })
    }
}

fn axpy_into(out: &mut [Vec<f64>], x: &[Vec<f64>], a: f64, y: &[Vec<f64>]) {
    for ((o, xv), yv) in out.iter_mut().zip(x).zip(y) {
        for ((oi, xi), yi) in o.iter_mut().zip(xv).zip(yv) {
            *oi = xi + a * yi;
        }
    }
}

#[derive(Debug, Clone)]
pub struct EvolveOptions {
    /// Number of output frames after the initial one.
    pub frames: usize,
    pub keep_frames: bool,
    /// Analytic travelling waves for the error column, in graph order.
    pub reference: Option<Vec<SolitonProfile>>,
    /// Abort when `max |u|` exceeds this multiple of the initial maximum.
    pub blowup_factor: f64,
    /// Also sample vertex residuals every this many steps (0: frames only).
    pub track_vertex_every: usize,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            frames: 10,
            keep_frames: false,
            reference: None,
            blowup_factor: 1e3,
            track_vertex_every: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Evolution {
    pub final_field: GraphField,
    pub frames: Vec<GraphField>,
    /// Initial frame first.
    pub diagnostics: Vec<Diagnostic>,
    /// Componentwise maximum of the vertex residuals over all samples.
    pub peak_vertex: VertexResiduals,
    pub steps: usize,
    pub dt: f64,
}

impl Evolution {
    pub fn final_error(&self) -> Option<f64> {
        self.diagnostics.last().and_then(|d| d.rel_l2_error)
    }
}

#[cfg(test)]
mod tests;
