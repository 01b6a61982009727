//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

/// Default relative threshold for numerical rank.
pub const DEFAULT_RANK_REL_TOL: f64 = 1e-8;

/// Singular values (descending) and the numerical rank: the count of values
/// above `rel_tol * σ_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct RankInfo {
    pub rank: usize,
    pub singular_values: Vec<f64>,
    pub threshold: f64,
}

pub fn numerical_rank(m: &DMatrix<f64>, rel_tol: f64) -> RankInfo {
    if m.nrows() == 0 || m.ncols() == 0 {
        return RankInfo {
            rank: 0,
            singular_values: vec![],
            threshold: 0.0,
        };
    }
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let smax = sv.first().copied().unwrap_or(0.0);
    let threshold = rel_tol * smax;
    let rank = if smax == 0.0 {
        0
    } else {
        sv.iter().filter(|&&s| s > threshold).count()
    };
    RankInfo {
        rank,
        singular_values: sv,
        threshold,
    }
}

/// Least-squares solution of `a z ≈ b` via SVD.
pub fn least_squares(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let eps = (smax * 1e-13).max(f64::MIN_POSITIVE);
    svd.solve(b, eps)
        .unwrap_or_else(|_| DVector::zeros(a.ncols()))
}

/// Residual norm of projecting `v` onto the column span of `basis`.
pub fn span_residual(basis: &DMatrix<f64>, v: &DVector<f64>, rel_tol: f64) -> f64 {
    if basis.ncols() == 0 {
        return v.norm();
    }
    let svd = basis.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let smax = svd.singular_values.max();
    let mut proj = DVector::zeros(v.len());
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if smax > 0.0 && s > rel_tol * smax {
            let col = u.column(k);
            proj += col * col.dot(v);
        }
    }
    (v - proj).norm()
}

pub fn max_abs(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, |m, v| m.max(v.abs()))
}
