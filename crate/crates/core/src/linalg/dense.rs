//! Dense oracles for small problems.

use nalgebra::{DMatrix, DVector};

use super::{LinearOperator, Metric};

/// Matrix of `op` in the metric-orthonormal canonical basis
/// `e_k / sqrt(m_k)`.
///
/// An operator self-adjoint under `metric` comes out as a symmetric matrix,
/// and singular values are those of the operator in the metric norm.
pub fn dense_materialize(op: &dyn LinearOperator, metric: &Metric) -> DMatrix<f64> {
    let n = op.dim();
    let sq: Vec<f64> = metric.weights().iter().map(|w| w.sqrt()).collect();
    let mut m = DMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    let mut col = vec![0.0; n];
    for l in 0..n {
        e[l] = 1.0 / sq[l];
        op.apply(&e, &mut col);
        e[l] = 0.0;
        for k in 0..n {
            m[(k, l)] = sq[k] * col[k];
        }
    }
    m
}

/// Largest absolute asymmetry relative to the largest entry.
pub fn asymmetry(m: &DMatrix<f64>) -> f64 {
    let scale = m.amax().max(f64::MIN_POSITIVE);
    (m - m.transpose()).amax() / scale
}

/// Singular values in decreasing order.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// 1-norm condition number of a dense matrix; infinite when singular to
/// working precision.
pub fn condition_1norm(m: &DMatrix<f64>) -> f64 {
    let norm1 = |a: &DMatrix<f64>| a.column_iter().map(|c| c.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
    match m.clone().lu().try_inverse() {
        Some(inv) if inv.iter().all(|v| v.is_finite()) => norm1(m) * norm1(&inv),
        _ => f64::INFINITY,
    }
}

/// 1-norm condition number of the dense materialization of `op`.
pub fn condition_estimate(op: &dyn LinearOperator, metric: &Metric) -> f64 {
    condition_1norm(&dense_materialize(op, metric))
}

/// Numerical rank with the threshold `rel * sigma_max`.
pub fn rank(m: &DMatrix<f64>, rel: f64) -> usize {
    let s = singular_values(m);
    let cut = rel * s.first().copied().unwrap_or(0.0);
    s.iter().filter(|v| **v > cut).count()
}

/// Outcome of the bordering check for `[[L, b], [f^T, d]]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BorderedNullity {
    /// `dim ker L`.
    pub k: usize,
    /// `dim ker` of the bordered matrix.
    pub k_tilde: usize,
    /// `b` is outside the range of `L` and `f` does not vanish on `ker L`.
    pub predicate: bool,
}

impl BorderedNullity {
    /// The bordering lemma: the nullity drops exactly when the predicate holds.
    pub fn consistent(&self) -> bool {
        (self.k_tilde < self.k) == self.predicate
    }
}

/// Rank threshold shared by the oracles, relative to the largest singular value.
pub const RANK_TOL: f64 = 1e-8;

/// Nullities of a square `L` and of its bordering, via singular values.
/// Range and kernel membership are rank tests on `[L b]` and `[L; f^T]`,
/// all against one absolute cut.
pub fn bordered_nullity(l: &DMatrix<f64>, b: &DVector<f64>, f: &DVector<f64>, d: f64) -> BorderedNullity {
    let n = l.nrows();
    assert!(l.is_square() && b.len() == n && f.len() == n, "bordered_nullity needs a square L");
    let mut big = DMatrix::zeros(n + 1, n + 1);
    big.view_mut((0, 0), (n, n)).copy_from(l);
    big.view_mut((0, n), (n, 1)).copy_from(b);
    big.view_mut((n, 0), (1, n)).copy_from(&f.transpose());
    big[(n, n)] = d;
    let scale = singular_values(&big).first().copied().unwrap_or(0.0);
    let cut = RANK_TOL * scale;
    let count = |m: &DMatrix<f64>| singular_values(m).iter().filter(|v| **v > cut && scale > 0.0).count();
    let r = count(l);
    let r_cols = count(&big.view((0, 0), (n, n + 1)).into_owned());
    let r_rows = count(&big.view((0, 0), (n + 1, n)).into_owned());
    BorderedNullity { k: n - r, k_tilde: n + 1 - count(&big), predicate: r_cols > r && r_rows > r }
}
