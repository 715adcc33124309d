//! Ghost values at the vertex.
//!
//! Every edge is stored by distance from the vertex, `v[k] = u(σ k h)` with
//! `σ = -1` on incoming and `σ = +1` on outgoing edges, and carries two
//! ghosts `g1 = u(-σ h)`, `g2 = u(-2σ h)` beyond the vertex. With the one-sided
//! differences
//!
//! ```text
//! a = (v1 - v0) / h        (interior side)
//! b = (v0 - g1) / h        (ghost side)
//! m1 = (v1 + g1) / 2
//! s2 = ((v2 + g2) / 2 - v0) / h²
//! ```
//!
//! the `2|E|` ghosts solve
//!
//! - flux in `Y⊥`: `w = ±(-α s2 / 2 + β m1 / 2)` (minus sign on outgoing
//!   edges) with `<y, w> = 0` for a basis `y` of `Y` (`dim Y` rows),
//! - `b₋ = -U a₊` (`|E₋|` rows) and `b₊ = -K a₋` with
//!   `K = D₊⁻¹ Uᵀ D₋`, `D = diag α` (`|E₊|` rows),
//! - trace rate in `Y`: `<r, ∂t u(0)> = 0` for a basis `r` of `Y⊥`
//!   (`|E| − dim Y` rows); with traces in `Y` at `t = 0` this keeps them in
//!   `Y` exactly, since Runge–Kutta preserves linear invariants.
//!
//! With the trapezoid weight `1/2` on the vertex node, the linear part then
//! conserves `Σ_e h Σ_k w_k v_k²` exactly: the flux rows cancel the `v0 s2`
//! and `β` boundary terms, and the paired derivative rows cancel the `α a b`
//! terms for any `U`. On an effective line (`U = 1`, identical edges) the
//! ghosts are the mirrored partner values.
//!
//! The derivative rows match the exact solution to `O(h³)` only when the
//! first three derivatives reflect through the vertex the same way
//! (`u₋⁽ᵏ⁾ = U u₊⁽ᵏ⁾` and `u₊⁽ᵏ⁾ = K u₋⁽ᵏ⁾`), as on an effective line or a
//! symmetric junction. Closing outgoing edges by extrapolation instead is
//! consistent everywhere but has modes growing like `h⁻²`.

use nalgebra::{DMatrix, DVector};

use super::PdeError;
use crate::graph::{Orientation, StarGraph};
use crate::krein::YUCoupling;
use crate::linalg::rank;

/// `a·g1 + b·g2 + c` for the ghosts of one edge.
#[derive(Debug, Clone, Copy, Default)]
struct Lin {
    g1: f64,
    g2: f64,
    c: f64,
}

impl Lin {
    fn constant(c: f64) -> Self {
        Lin {
            c,
            ..Lin::default()
        }
    }

    fn scale(self, s: f64) -> Self {
        Lin {
            g1: self.g1 * s,
            g2: self.g2 * s,
            c: self.c * s,
        }
    }

    fn add(self, o: Self) -> Self {
        Lin {
            g1: self.g1 + o.g1,
            g2: self.g2 + o.g2,
            c: self.c + o.c,
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct VertexSystem {
    sigma: Vec<f64>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    gamma: Vec<f64>,
    n_minus: usize,
    y_basis: DMatrix<f64>,
    y_perp: DMatrix<f64>,
    u: DMatrix<f64>,
    /// `D₊⁻¹ Uᵀ D₋`.
    k: DMatrix<f64>,
    h: f64,
}

impl VertexSystem {
    pub(crate) fn new(g: &StarGraph, yu: &YUCoupling, h: f64) -> Result<Self, PdeError> {
        if yu.n_minus() != g.n_minus() || yu.n_plus() != g.n_plus() {
            return Err(PdeError::Setup(format!(
                "coupling is for {} + {} edges, graph has {} + {}",
                yu.n_minus(),
                yu.n_plus(),
                g.n_minus(),
                g.n_plus()
            )));
        }
        let alpha: Vec<f64> = g.edges().map(|(_, p)| p.alpha).collect();
        let nm = g.n_minus();
        let u = yu.u().clone();
        let mut k = u.transpose();
        for j in 0..k.nrows() {
            for i in 0..k.ncols() {
                k[(j, i)] *= alpha[i] / alpha[nm + j];
            }
        }
        let sys = Self {
            sigma: g
                .edges()
                .map(|(e, _)| {
                    if e.side == Orientation::Incoming {
                        -1.0
                    } else {
                        1.0
                    }
                })
                .collect(),
            beta: g.edges().map(|(_, p)| p.beta).collect(),
            gamma: g.edges().map(|(_, p)| p.gamma).collect(),
            alpha,
            n_minus: nm,
            y_basis: yu.y_basis().clone(),
            y_perp: yu.y_perp_basis().clone(),
            u,
            k,
            h,
        };
        let zero: Vec<[f64; 4]> = vec![[0.0; 4]; g.len()];
        let (m, _) = sys.assemble(&zero);
        let r = rank(&m, 1e-12);
        if r < m.nrows() {
            return Err(PdeError::SingularVertex {
                rank: r,
                size: m.nrows(),
            });
        }
        Ok(sys)
    }

    pub(crate) fn sigma(&self, e: usize) -> f64 {
        self.sigma[e]
    }

    fn edges(&self) -> usize {
        self.sigma.len()
    }

    /// Rows in the unknowns `(g1_0, g2_0, g1_1, ...)` and right-hand side.
    /// `near[e] = (v0, v1, v2, v3)`.
    fn assemble(&self, near: &[[f64; 4]]) -> (DMatrix<f64>, DVector<f64>) {
        let n = self.edges();
        let nm = self.n_minus;
        let h = self.h;
        let h2 = h * h;
        let h3 = h2 * h;
        let interior: Vec<f64> = near.iter().map(|v| (v[1] - v[0]) / h).collect();
        let ghost_side = |e: usize| Lin {
            g1: -1.0 / h,
            g2: 0.0,
            c: near[e][0] / h,
        };
        let m1 = |e: usize| Lin {
            g1: 0.5,
            g2: 0.0,
            c: 0.5 * near[e][1],
        };
        let s2 = |e: usize| Lin {
            g1: 0.0,
            g2: 0.5 / h2,
            c: (0.5 * near[e][2] - near[e][0]) / h2,
        };
        let d1 = |e: usize| {
            let s = self.sigma[e];
            Lin {
                g1: -s / (2.0 * h),
                g2: 0.0,
                c: s * near[e][1] / (2.0 * h),
            }
        };
        let d3 = |e: usize| {
            let s = self.sigma[e];
            Lin {
                g1: s / h3,
                g2: -s / (2.0 * h3),
                c: s * (near[e][2] - 2.0 * near[e][1]) / (2.0 * h3),
            }
        };

        let mut rows: Vec<Vec<Lin>> = Vec::with_capacity(2 * n);
        // flux vector in Y⊥
        for k in 0..self.y_basis.ncols() {
            rows.push(
                (0..n)
                    .map(|e| {
                        let side = if e < nm { 1.0 } else { -1.0 };
                        s2(e)
                            .scale(-0.5 * self.alpha[e])
                            .add(m1(e).scale(0.5 * self.beta[e]))
                            .scale(side * self.y_basis[(e, k)])
                    })
                    .collect(),
            );
        }
        // b₋ + U a₊ = 0
        for i in 0..nm {
            let mut row = vec![Lin::default(); n];
            let pull: f64 = (0..n - nm).map(|j| self.u[(i, j)] * interior[nm + j]).sum();
            row[i] = ghost_side(i).add(Lin::constant(pull));
            rows.push(row);
        }
        // b₊ + K a₋ = 0
        for j in 0..n - nm {
            let mut row = vec![Lin::default(); n];
            let pull: f64 = (0..nm).map(|i| self.k[(j, i)] * interior[i]).sum();
            row[nm + j] = ghost_side(nm + j).add(Lin::constant(pull));
            rows.push(row);
        }
        // trace rate stays in Y
        for k in 0..self.y_perp.ncols() {
            rows.push(
                (0..n)
                    .map(|e| {
                        let rate = d3(e)
                            .scale(-self.alpha[e])
                            .add(d1(e).scale(self.beta[e] + self.gamma[e] * near[e][0]));
                        rate.scale(self.y_perp[(e, k)])
                    })
                    .collect(),
            );
        }

        let mut m = DMatrix::zeros(2 * n, 2 * n);
        let mut rhs = DVector::zeros(2 * n);
        for (r, row) in rows.iter().enumerate() {
            let mut c = 0.0;
            for (e, l) in row.iter().enumerate() {
                m[(r, 2 * e)] = l.g1;
                m[(r, 2 * e + 1)] = l.g2;
                c += l.c;
            }
            rhs[r] = -c;
        }
        (m, rhs)
    }

    /// Ghosts `[g1, g2]` per edge for the given near-vertex values.
    pub(crate) fn solve(&self, near: &[[f64; 4]]) -> Result<Vec<[f64; 2]>, PdeError> {
        let (m, rhs) = self.assemble(near);
        let z = m.lu().solve(&rhs).ok_or(PdeError::SingularVertex {
            rank: 0,
            size: rhs.len(),
        })?;
        Ok((0..self.edges())
            .map(|e| [z[2 * e], z[2 * e + 1]])
            .collect())
    }
}
