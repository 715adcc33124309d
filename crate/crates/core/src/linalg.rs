use nalgebra::{DMatrix, DVector};

/// Smallest eigenvalue of the symmetric part of `m`.
pub(crate) fn min_symmetric_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return f64::INFINITY;
    }
    let sym = (m + m.transpose()) * 0.5;
    sym.symmetric_eigenvalues().min()
}

pub(crate) fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc: f64, v| acc.max(v.abs()))
}

/// Numerical rank with relative cutoff `rel_tol · σ_max`.
pub(crate) fn rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().singular_values();
    let top = sv.max();
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|s| **s > rel_tol * top).count()
}

/// Orthonormal bases `(Q_range, Q_complement)` of the column span of `cols`
/// and of its Euclidean orthogonal complement.
pub(crate) fn split_span(cols: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = cols.nrows();
    let k = cols.ncols();
    // Gram–Schmidt on [cols | e_1 .. e_n] (twice, for stability)
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(n);
    let mut range_dim = 0;
    let candidates = (0..k)
        .map(|j| cols.column(j).into_owned())
        .chain((0..n).map(|i| DVector::from_fn(n, |r, _| if r == i { 1.0 } else { 0.0 })));
    for (idx, mut v) in candidates.enumerate() {
        let norm0 = v.norm();
        if norm0 == 0.0 {
            continue;
        }
        for _ in 0..2 {
            for q in &basis {
                let d = q.dot(&v);
                v.axpy(-d, q, 1.0);
            }
        }
        if v.norm() > 1e-10 * norm0 {
            v.normalize_mut();
            basis.push(v);
            if idx < k {
                range_dim += 1;
            }
        }
        if basis.len() == n {
            break;
        }
    }
    let range = DMatrix::from_columns(&basis[..range_dim]);
    let comp = DMatrix::from_columns(&basis[range_dim..]);
    (
        if range_dim == 0 {
            DMatrix::zeros(n, 0)
        } else {
            range
        },
        if range_dim == n {
            DMatrix::zeros(n, 0)
        } else {
            comp
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn span_split_is_orthonormal_and_complete() {
        let y = DMatrix::from_column_slice(3, 1, &[1.0, 0.5, 0.5]);
        let (q, p) = split_span(&y);
        assert_eq!((q.ncols(), p.ncols()), (1, 2));
        let all = DMatrix::from_columns(&[q.column(0), p.column(0), p.column(1)]);
        let gram = all.transpose() * &all;
        assert!((gram - DMatrix::identity(3, 3)).abs().max() < 1e-14);
        assert!((p.transpose() * y).abs().max() < 1e-14);
    }

    #[test]
    fn rank_of_dependent_columns() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert_eq!(rank(&m, 1e-12), 1);
        assert_eq!(min_symmetric_eigenvalue(&DMatrix::identity(2, 2)), 1.0);
    }
}
