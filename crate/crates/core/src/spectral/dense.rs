//! Small dense kernels shared by the iterative solvers.

use faer::linalg::matmul::matmul;
use faer::linalg::triangular_solve::{solve_lower_triangular_in_place, solve_upper_triangular_in_place};
use faer::{get_global_parallelism, Accum, Mat, MatMut, MatRef, Side};

use crate::error::{Error, Result};

/// `Aᵀ B`.
pub(crate) fn atb(a: MatRef<'_, f64>, b: MatRef<'_, f64>) -> Mat<f64> {
    let mut out = Mat::zeros(a.ncols(), b.ncols());
    matmul(out.as_mut(), Accum::Replace, a.transpose(), b, 1.0, get_global_parallelism());
    out
}

/// `A B`.
pub(crate) fn ab(a: MatRef<'_, f64>, b: MatRef<'_, f64>) -> Mat<f64> {
    let mut out = Mat::zeros(a.nrows(), b.ncols());
    matmul(out.as_mut(), Accum::Replace, a, b, 1.0, get_global_parallelism());
    out
}

/// `dst += alpha · A B`.
pub(crate) fn ab_acc(dst: MatMut<'_, f64>, a: MatRef<'_, f64>, b: MatRef<'_, f64>, alpha: f64) {
    matmul(dst, Accum::Add, a, b, alpha, get_global_parallelism());
}

pub(crate) fn symmetrize(m: &mut Mat<f64>) {
    let n = m.nrows();
    for j in 0..n {
        for i in 0..j {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

/// Eigenvalues ascending with their orthonormal eigenvectors.
pub(crate) fn sym_eig(m: MatRef<'_, f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    let e = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Factorization(format!("dense eigendecomposition failed: {e:?}")))?;
    let s = e.S().column_vector();
    let vals = (0..m.nrows()).map(|i| s[i]).collect();
    Ok((vals, e.U().to_owned()))
}

/// Lower Cholesky factor of a symmetric positive-definite matrix.
pub(crate) fn cholesky(m: MatRef<'_, f64>) -> Option<Mat<f64>> {
    m.llt(Side::Lower).ok().map(|l| l.L().to_owned())
}

/// `X ← X L⁻ᵀ` (right-multiplication by the inverse transpose of a lower factor).
pub(crate) fn right_solve_lt(x: MatMut<'_, f64>, l: MatRef<'_, f64>) {
    // X L⁻ᵀ = (L⁻¹ Xᵀ)ᵀ
    solve_lower_triangular_in_place(l, x.transpose_mut(), get_global_parallelism());
}

/// `X ← L⁻¹ X`.
pub(crate) fn left_solve_l(x: MatMut<'_, f64>, l: MatRef<'_, f64>) {
    solve_lower_triangular_in_place(l, x, get_global_parallelism());
}

/// `X ← L⁻ᵀ X`.
pub(crate) fn left_solve_lt(x: MatMut<'_, f64>, l: MatRef<'_, f64>) {
    solve_upper_triangular_in_place(l.transpose(), x, get_global_parallelism());
}

/// Full generalized eigendecomposition of a small dense pencil `(W, S)`.
pub fn generalized_eig(w: MatRef<'_, f64>, s: MatRef<'_, f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    let n = w.nrows();
    let l = cholesky(s).ok_or_else(|| Error::Factorization("mass matrix is not positive definite".into()))?;
    // C = L⁻¹ W L⁻ᵀ
    let mut c = w.to_owned();
    left_solve_l(c.as_mut(), l.as_ref());
    right_solve_lt(c.as_mut(), l.as_ref());
    symmetrize(&mut c);
    let (vals, mut u) = sym_eig(c.as_ref())?;
    left_solve_lt(u.as_mut(), l.as_ref());
    debug_assert_eq!(u.nrows(), n);
    Ok((vals, u))
}

/// Flips each column so that its largest-magnitude entry is positive.
pub(crate) fn fix_signs(x: &mut Mat<f64>) {
    for j in 0..x.ncols() {
        let mut best = 0.0f64;
        let mut sign = 1.0;
        for i in 0..x.nrows() {
            let v = x[(i, j)];
            if v.abs() > best {
                best = v.abs();
                sign = v.signum();
            }
        }
        if sign < 0.0 {
            for i in 0..x.nrows() {
                x[(i, j)] = -x[(i, j)];
            }
        }
    }
}

pub(crate) fn col_norm(x: MatRef<'_, f64>, j: usize) -> f64 {
    x.col(j).iter().map(|v| v * v).sum::<f64>().sqrt()
}
