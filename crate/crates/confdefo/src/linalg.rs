//! Dense SVD utilities: numerical rank, nullspace bases, minimum-norm
//! least-squares solves, and the singular-value window reported next to
//! every rank decision so borderline cases stay auditable.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

/// Singular values bracketing a rank cutoff.
///
/// `rank` is the number of singular values classified as nonzero; `values`
/// holds up to five consecutive singular values around the boundary and
/// `first_index` is the index (in the full descending list) of `values[0]`.
#[derive(Debug, Clone, Serialize)]
pub struct SvWindow {
    pub rank: usize,
    pub sigma_max: f64,
    pub first_index: usize,
    pub values: Vec<f64>,
}

impl SvWindow {
    fn new(svs: &[f64], rank: usize) -> Self {
        let lo = rank.saturating_sub(3);
        let hi = (rank + 2).min(svs.len());
        SvWindow {
            rank,
            sigma_max: svs.first().copied().unwrap_or(0.0),
            first_index: lo,
            values: svs[lo..hi].to_vec(),
        }
    }
}

/// Full descending singular values of `a`.
pub fn singular_values(a: &DMatrix<f64>) -> Vec<f64> {
    let mut svs: Vec<f64> = a.clone().svd(false, false).singular_values.iter().copied().collect();
    svs.sort_by(|x, y| y.partial_cmp(x).unwrap());
    svs
}

/// Numerical rank with the relative cutoff `sigma <= rank_rel * sigma_max`.
pub fn rank(a: &DMatrix<f64>, rank_rel: f64) -> usize {
    let svs = singular_values(a);
    count_above(&svs, rank_rel)
}

fn count_above(svs: &[f64], rank_rel: f64) -> usize {
    let smax = svs.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return 0;
    }
    svs.iter().filter(|&&s| s > rank_rel * smax).count()
}

/// Nullspace of `a` (right null vectors), its dimension, and the
/// singular-value window at the cutoff.
///
/// Wide matrices are zero-padded to square first so the full right singular
/// basis is available; padding adds exact zero singular values and does not
/// perturb the rest.
pub fn nullspace(a: &DMatrix<f64>, rank_rel: f64) -> (Vec<DVector<f64>>, SvWindow) {
    let n = a.ncols();
    let padded;
    let work = if a.nrows() < n {
        padded = pad_rows(a, n);
        &padded
    } else {
        a
    };
    let svd = work.clone().svd(false, true);
    let v_t = svd.v_t.expect("SVD with v_t requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].partial_cmp(&svd.singular_values[i]).unwrap());
    let svs: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let r = count_above(&svs, rank_rel);
    let basis = order[r..]
        .iter()
        .map(|&i| v_t.row(i).transpose())
        .collect();
    (basis, SvWindow::new(&svs, r))
}

/// Minimum-norm least-squares solution of `a x = b` via truncated SVD,
/// together with the residual norm `|a x - b|`.
pub fn min_norm_lstsq(a: &DMatrix<f64>, b: &DVector<f64>, rank_rel: f64) -> (DVector<f64>, f64) {
    assert_eq!(a.nrows(), b.len(), "rhs length mismatch");
    let svd = a.clone().svd(true, true);
    let u = svd.u.as_ref().expect("SVD with u requested");
    let v_t = svd.v_t.as_ref().expect("SVD with v_t requested");
    let svs = &svd.singular_values;
    let smax = svs.iter().cloned().fold(0.0_f64, f64::max);
    let cutoff = rank_rel * smax;
    let mut x = DVector::zeros(a.ncols());
    for i in 0..svs.len() {
        if svs[i] > cutoff {
            let coef = u.column(i).dot(b) / svs[i];
            x.axpy(coef, &v_t.row(i).transpose(), 1.0);
        }
    }
    let residual = (a * &x - b).norm();
    (x, residual)
}

/// Left null vectors of `a` (the cokernel): `y` with `a^T y = 0`.
pub fn left_nullspace(a: &DMatrix<f64>, rank_rel: f64) -> Vec<DVector<f64>> {
    nullspace(&a.transpose(), rank_rel).0
}

fn pad_rows(a: &DMatrix<f64>, rows: usize) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(rows, a.ncols());
    out.view_mut((0, 0), (a.nrows(), a.ncols())).copy_from(a);
    out
}

/// Orthonormalize the span of `vecs` (modified Gram-Schmidt), dropping
/// near-dependent vectors.
pub fn orthonormalize(vecs: &[DVector<f64>]) -> Vec<DVector<f64>> {
    let mut basis: Vec<DVector<f64>> = Vec::new();
    for v in vecs {
        let mut w = v.clone();
        for b in &basis {
            let c = b.dot(&w);
            w.axpy(-c, b, 1.0);
        }
        // second pass for numerical orthogonality
        for b in &basis {
            let c = b.dot(&w);
            w.axpy(-c, b, 1.0);
        }
        let n = w.norm();
        if n > 1e-12 * v.norm().max(1.0) {
            basis.push(w / n);
        }
    }
    basis
}

/// Project `x` onto the orthogonal complement of the span of the
/// orthonormal vectors `basis`.
pub fn project_out(x: &mut DVector<f64>, basis: &[DVector<f64>]) {
    for b in basis {
        let c = b.dot(x);
        x.axpy(-c, b, 1.0);
    }
}
