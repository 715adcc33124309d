//! Finite-dimensional Krein-space machinery for vertex couplings of the linear
//! (Airy) part of the equation.
//!
//! Boundary data on one side of the vertex lives in `G = R^n ⊕ R^n ⊕ R^n`
//! (trace, first and second derivative, each stacked in edge order). The
//! indefinite form on `G` is `[[x, y]] = <B x, y>` with
//!
//! ```text
//!     | -β   0   α |
//! B = |  0  -α   0 |
//!     |  α   0   0 |
//! ```
//!
//! built from the diagonal coefficient matrices of that side.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::graph::StarGraph;
use crate::linalg::{max_abs, min_symmetric_eigenvalue, rank, split_span};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KreinError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("alpha must be positive, got {value} at position {index}")]
    NonPositiveAlpha { index: usize, value: f64 },
    #[error("spanning set of Y is linearly dependent (rank {rank} < {vectors})")]
    DependentSpan { rank: usize, vectors: usize },
}

fn dim_err(msg: impl Into<String>) -> KreinError {
    KreinError::Dimension(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Minus,
    Plus,
}

/// The matrix `B±` of one side of the vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct KreinForm {
    b: DMatrix<f64>,
    side: Side,
    edges: usize,
}

impl KreinForm {
    pub fn new(alphas: &[f64], betas: &[f64], side: Side) -> Result<Self, KreinError> {
        if alphas.len() != betas.len() {
            return Err(dim_err(format!(
                "{} alphas but {} betas",
                alphas.len(),
                betas.len()
            )));
        }
        if let Some((index, &value)) = alphas.iter().enumerate().find(|(_, a)| !(**a > 0.0)) {
            return Err(KreinError::NonPositiveAlpha { index, value });
        }
        let n = alphas.len();
        let mut b = DMatrix::zeros(3 * n, 3 * n);
        for e in 0..n {
            b[(e, e)] = -betas[e];
            b[(e, 2 * n + e)] = alphas[e];
            b[(n + e, n + e)] = -alphas[e];
            b[(2 * n + e, e)] = alphas[e];
        }
        Ok(Self { b, side, edges: n })
    }

    /// Forms `(B-, B+)` for a graph.
    pub fn for_graph(g: &StarGraph) -> Result<(Self, Self), KreinError> {
        use crate::graph::Orientation::*;
        Ok((
            Self::new(&g.alphas(Incoming), &g.betas(Incoming), Side::Minus)?,
            Self::new(&g.alphas(Outgoing), &g.betas(Outgoing), Side::Plus)?,
        ))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn edges(&self) -> usize {
        self.edges
    }

    /// Dimension `3n` of the boundary space.
    pub fn dim(&self) -> usize {
        3 * self.edges
    }

    /// Exact inverse, read off the block structure:
    /// `B⁻¹ = [[0, 0, 1/α], [0, -1/α, 0], [1/α, 0, β/α²]]`.
    pub fn inverse(&self) -> DMatrix<f64> {
        let n = self.edges;
        let mut inv = DMatrix::zeros(3 * n, 3 * n);
        for e in 0..n {
            let a = self.b[(e, 2 * n + e)];
            let beta = -self.b[(e, e)];
            inv[(e, 2 * n + e)] = 1.0 / a;
            inv[(n + e, n + e)] = -1.0 / a;
            inv[(2 * n + e, e)] = 1.0 / a;
            inv[(2 * n + e, 2 * n + e)] = beta / (a * a);
        }
        inv
    }

    /// `<B x, y>`.
    pub fn inner(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<f64, KreinError> {
        if x.len() != self.dim() || y.len() != self.dim() {
            return Err(dim_err(format!(
                "vectors of length {} and {} against a {}-dimensional form",
                x.len(),
                y.len(),
                self.dim()
            )));
        }
        Ok((&self.b * x).dot(y))
    }
}

/// [`KreinForm::new`] as a free function.
pub fn build_b(alphas: &[f64], betas: &[f64], side: Side) -> Result<KreinForm, KreinError> {
    KreinForm::new(alphas, betas, side)
}

pub fn indefinite_inner(
    k: &KreinForm,
    x: &DVector<f64>,
    y: &DVector<f64>,
) -> Result<f64, KreinError> {
    k.inner(x, y)
}

/// A linear map `L: K- -> K+` of boundary data.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingOperator {
    l: DMatrix<f64>,
}

impl CouplingOperator {
    pub fn new(l: DMatrix<f64>) -> Self {
        Self { l }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.l
    }

    fn check(&self, minus: &KreinForm, plus: &KreinForm) -> Result<(), KreinError> {
        if self.l.nrows() != plus.dim() || self.l.ncols() != minus.dim() {
            return Err(dim_err(format!(
                "L is {}x{}, expected {}x{}",
                self.l.nrows(),
                self.l.ncols(),
                plus.dim(),
                minus.dim()
            )));
        }
        Ok(())
    }
}

/// `L♯ = B-⁻¹ Lᵀ B+`, the unique map with `[[L x, y]]+ = [[x, L♯ y]]-`.
pub fn sharp_adjoint(
    minus: &KreinForm,
    plus: &KreinForm,
    l: &CouplingOperator,
) -> Result<DMatrix<f64>, KreinError> {
    l.check(minus, plus)?;
    Ok(minus.inverse() * l.l.transpose() * plus.matrix())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitaryVerdict {
    /// `max |Lᵀ B+ L - B-|`.
    pub residual: f64,
    pub pass: bool,
}

/// `L` preserves the indefinite form: `Lᵀ B+ L = B-`.
pub fn is_krein_unitary(
    minus: &KreinForm,
    plus: &KreinForm,
    l: &CouplingOperator,
    tol: f64,
) -> Result<UnitaryVerdict, KreinError> {
    l.check(minus, plus)?;
    let gap = l.l.transpose() * plus.matrix() * &l.l - minus.matrix();
    let residual = max_abs(&gap);
    Ok(UnitaryVerdict {
        residual,
        pass: residual <= tol,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContractiveVerdict {
    /// Smallest eigenvalue of `B- - Lᵀ B+ L`.
    pub forward_min_eig: f64,
    /// Smallest eigenvalue of `B+ - L♯ᵀ B- L♯`.
    pub adjoint_min_eig: f64,
    pub pass: bool,
}

/// Both `L` and `L♯` are contractive in the indefinite forms, decided by
/// symmetric eigenvalues with floor `-tol`.
pub fn is_krein_contractive(
    minus: &KreinForm,
    plus: &KreinForm,
    l: &CouplingOperator,
    tol: f64,
) -> Result<ContractiveVerdict, KreinError> {
    let sharp = sharp_adjoint(minus, plus, l)?;
    let forward = minus.matrix() - l.l.transpose() * plus.matrix() * &l.l;
    let adjoint = plus.matrix() - sharp.transpose() * minus.matrix() * &sharp;
    let forward_min_eig = min_symmetric_eigenvalue(&forward);
    let adjoint_min_eig = min_symmetric_eigenvalue(&adjoint);
    Ok(ContractiveVerdict {
        forward_min_eig,
        adjoint_min_eig,
        pass: forward_min_eig >= -tol && adjoint_min_eig >= -tol,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedVerdict {
    /// Unitary test: `max |Uᵀ D- U - D+|`. Contraction test: smallest
    /// eigenvalue of `D+ - Uᵀ D- U`.
    pub residual: f64,
    pub pass: bool,
}

fn check_weighted(
    u: &DMatrix<f64>,
    minus: &[f64],
    plus: &[f64],
) -> Result<DMatrix<f64>, KreinError> {
    if u.nrows() != minus.len() || u.ncols() != plus.len() {
        return Err(dim_err(format!(
            "U is {}x{}, expected {}x{}",
            u.nrows(),
            u.ncols(),
            minus.len(),
            plus.len()
        )));
    }
    let dm = DMatrix::from_diagonal(&DVector::from_column_slice(minus));
    let dp = DMatrix::from_diagonal(&DVector::from_column_slice(plus));
    Ok(dp - u.transpose() * dm * u)
}

/// `U: (R^{E+}, α+) -> (R^{E-}, α-)` is unitary: `Uᵀ D- U = D+` and the
/// spaces have equal dimension.
pub fn is_weighted_unitary(
    u: &DMatrix<f64>,
    alphas_minus: &[f64],
    alphas_plus: &[f64],
    tol: f64,
) -> Result<WeightedVerdict, KreinError> {
    let gap = check_weighted(u, alphas_minus, alphas_plus)?;
    let residual = max_abs(&gap);
    Ok(WeightedVerdict {
        residual,
        pass: residual <= tol && u.is_square(),
    })
}

/// `U` is a contraction between the α-weighted spaces: `D+ - Uᵀ D- U ⪰ 0`.
pub fn is_weighted_contraction(
    u: &DMatrix<f64>,
    alphas_minus: &[f64],
    alphas_plus: &[f64],
    tol: f64,
) -> Result<WeightedVerdict, KreinError> {
    let gap = check_weighted(u, alphas_minus, alphas_plus)?;
    let residual = min_symmetric_eigenvalue(&gap);
    Ok(WeightedVerdict {
        residual,
        pass: residual >= -tol,
    })
}

/// `(Y, U)` coupling: traces in `Y`, the flux vector in `Y⊥` and
/// `u'(0-) = U u'(0+)`. Orthogonality is Euclidean on `R^{E-} ⊕ R^{E+}`.
#[derive(Debug, Clone, PartialEq)]
pub struct YUCoupling {
    span: DMatrix<f64>,
    y_basis: DMatrix<f64>,
    y_perp_basis: DMatrix<f64>,
    u: DMatrix<f64>,
    n_minus: usize,
}

impl YUCoupling {
    /// `span` holds the spanning vectors of `Y` as columns.
    pub fn new(span: DMatrix<f64>, u: DMatrix<f64>) -> Result<Self, KreinError> {
        let n_minus = u.nrows();
        let n = n_minus + u.ncols();
        if span.nrows() != n {
            return Err(dim_err(format!(
                "Y vectors have length {}, U implies {n} edges",
                span.nrows()
            )));
        }
        let r = rank(&span, 1e-12);
        if r < span.ncols() {
            return Err(KreinError::DependentSpan {
                rank: r,
                vectors: span.ncols(),
            });
        }
        let (y_basis, y_perp_basis) = split_span(&span);
        Ok(Self {
            span,
            y_basis,
            y_perp_basis,
            u,
            n_minus,
        })
    }

    /// `Y = span(1)`.
    pub fn continuity(u: DMatrix<f64>) -> Result<Self, KreinError> {
        let n = u.nrows() + u.ncols();
        Self::new(DMatrix::from_element(n, 1, 1.0), u)
    }

    /// `Y = span{(1, a, a)}` on a one-in/two-out graph.
    pub fn y_junction(a: f64, u: DMatrix<f64>) -> Result<Self, KreinError> {
        if u.shape() != (1, 2) {
            return Err(dim_err(format!(
                "Y-junction needs a 1x2 U, got {:?}",
                u.shape()
            )));
        }
        Self::new(DMatrix::from_column_slice(3, 1, &[1.0, a, a]), u)
    }

    pub fn span(&self) -> &DMatrix<f64> {
        &self.span
    }

    pub fn u(&self) -> &DMatrix<f64> {
        &self.u
    }

    pub fn n_minus(&self) -> usize {
        self.n_minus
    }

    pub fn n_plus(&self) -> usize {
        self.u.ncols()
    }

    pub fn n_edges(&self) -> usize {
        self.n_minus + self.u.ncols()
    }

    /// Orthonormal basis of `Y` (columns).
    pub fn y_basis(&self) -> &DMatrix<f64> {
        &self.y_basis
    }

    /// Orthonormal basis of `Y⊥` (columns).
    pub fn y_perp_basis(&self) -> &DMatrix<f64> {
        &self.y_perp_basis
    }

    /// `‖v - P_Y v‖`.
    pub fn distance_to_y(&self, v: &DVector<f64>) -> f64 {
        (self.y_perp_basis.transpose() * v).norm()
    }

    /// `‖P_Y v‖`, the distance of `v` to `Y⊥`.
    pub fn distance_to_y_perp(&self, v: &DVector<f64>) -> f64 {
        (self.y_basis.transpose() * v).norm()
    }
}
