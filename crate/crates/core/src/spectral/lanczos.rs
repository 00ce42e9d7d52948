//! Shift-invert block Lanczos with full reorthogonalization and thick restart.
//!
//! Works with `A = (W − σS)⁻¹ S`, which is self-adjoint in the S-inner product
//! and maps the smallest pencil eigenvalues `λ` to the largest `θ = 1/(λ − σ)`.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::Llt;
use faer::{Mat, MatRef, Side};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::sparse::{self, SparseMat};

use super::dense::{ab, ab_acc, atb, cholesky, right_solve_lt, sym_eig, symmetrize};
use super::{relative_residuals, Converged, SolverPlan};

struct Operator<'a> {
    mass: &'a SparseMat,
    llt: Llt<usize, f64>,
}

impl Operator<'_> {
    fn apply(&self, q: MatRef<'_, f64>) -> Mat<f64> {
        let sq = sparse::mul(self.mass, q);
        self.llt.solve(&sq)
    }
}

/// S-orthogonalizes `z` against the first `cur` columns of `v` (two passes)
/// and returns the accumulated coefficients.
fn orthogonalize(mass: &SparseMat, v: MatRef<'_, f64>, z: &mut Mat<f64>) -> Mat<f64> {
    let mut h = Mat::zeros(v.ncols(), z.ncols());
    if v.ncols() == 0 {
        return h;
    }
    for _ in 0..2 {
        let sz = sparse::mul(mass, z.as_ref());
        let c = atb(v, sz.as_ref());
        ab_acc(z.as_mut(), v, c.as_ref(), -1.0);
        h += &c;
    }
    h
}

/// S-orthonormalizes `z` in place (CholQR2), returning `R` with `z_in = z_out R`.
///
/// Columns that are numerically dependent are replaced by random directions
/// orthogonal to `v` and to the rest of the block; their rows of `R` are zero.
fn orthonormalize(mass: &SparseMat, v: MatRef<'_, f64>, z: &mut Mat<f64>, rng: &mut ChaCha8Rng) -> Mat<f64> {
    let b = z.ncols();
    let mut r_total = Mat::<f64>::identity(b, b);
    for pass in 0..2 {
        let sz = sparse::mul(mass, z.as_ref());
        let mut g = atb(z.as_ref(), sz.as_ref());
        symmetrize(&mut g);
        let scale = (0..b).map(|i| g[(i, i)]).fold(0.0, f64::max);
        let ok = scale > 0.0 && (0..b).all(|i| g[(i, i)] > 1e-20 * scale);
        match cholesky(g.as_ref()).filter(|_| ok) {
            Some(l) => {
                right_solve_lt(z.as_mut(), l.as_ref());
                // z_prev = z_new Lᵀ
                r_total = ab(l.transpose(), r_total.as_ref());
                if pass == 1 {
                    return r_total;
                }
            }
            None => return gram_schmidt(mass, v, z, r_total, rng),
        }
    }
    r_total
}

fn gram_schmidt(
    mass: &SparseMat,
    v: MatRef<'_, f64>,
    z: &mut Mat<f64>,
    r_prev: Mat<f64>,
    rng: &mut ChaCha8Rng,
) -> Mat<f64> {
    let (n, b) = (z.nrows(), z.ncols());
    let mut r = Mat::<f64>::zeros(b, b);
    let s_norm = |x: &Mat<f64>| -> f64 {
        let sx = sparse::mul(mass, x.as_ref());
        atb(x.as_ref(), sx.as_ref())[(0, 0)].max(0.0).sqrt()
    };
    let mut original_norms = vec![0.0; b];
    for j in 0..b {
        original_norms[j] = s_norm(&z.subcols(j, 1).to_owned());
    }
    for j in 0..b {
        let mut col = z.subcols(j, 1).to_owned();
        let mut replaced = false;
        for attempt in 0..4 {
            for _ in 0..2 {
                let _ = orthogonalize(mass, v, &mut col);
                if j > 0 {
                    let prev = z.subcols(0, j);
                    let sc = sparse::mul(mass, col.as_ref());
                    let c = atb(prev, sc.as_ref());
                    ab_acc(col.as_mut(), prev, c.as_ref(), -1.0);
                    if !replaced {
                        for i in 0..j {
                            r[(i, j)] += c[(i, 0)];
                        }
                    }
                }
            }
            let nrm = s_norm(&col);
            let reference = if replaced { 1.0 } else { original_norms[j] };
            if nrm > 1e-10 * reference.max(f64::MIN_POSITIVE) && nrm > 0.0 {
                for i in 0..n {
                    col[(i, 0)] /= nrm;
                }
                if !replaced {
                    r[(j, j)] = nrm;
                }
                break;
            }
            if attempt == 3 {
                log::warn!("could not complete an S-orthonormal block");
            }
            replaced = true;
            for i in 0..j {
                r[(i, j)] = 0.0;
            }
            col = Mat::from_fn(n, 1, |_, _| rng.random_range(-1.0..1.0));
        }
        z.subcols_mut(j, 1).copy_from(&col);
    }
    ab(r.as_ref(), r_prev.as_ref())
}

pub(crate) fn solve(
    stiffness: &SparseMat,
    mass: &SparseMat,
    plan: &SolverPlan,
    rng: &mut ChaCha8Rng,
) -> Result<Converged> {
    let n = stiffness.nrows();
    let SolverPlan {
        k,
        block,
        keep,
        subspace,
        tol,
        max_cycles,
        shift,
    } = *plan;
    let b = block;
    let m_max = subspace;
    let p = keep;
    debug_assert!(m_max <= n);

    let shifted = sparse::add_scaled(stiffness, mass, -shift);
    let llt = shifted
        .sp_cholesky(Side::Lower)
        .map_err(|e| Error::Factorization(format!("sparse Cholesky of W - σS failed: {e:?}")))?;
    let op = Operator { mass, llt };

    let mut v = Mat::<f64>::zeros(n, m_max);
    let mut t = Mat::<f64>::zeros(m_max, m_max);
    let mut cur = 0usize;

    let mut q = Mat::from_fn(n, b, |_, _| rng.random_range(-1.0..1.0));
    orthonormalize(mass, v.subcols(0, 0), &mut q, rng);
    // coupling of the pending block to the basis: A V = V T + Q rq
    let mut rq = Mat::<f64>::zeros(b, 0);

    let mut last_residuals = vec![f64::INFINITY; k];
    for cycle in 0..=max_cycles {
        while cur + b <= m_max {
            v.subcols_mut(cur, b).copy_from(&q);
            t.submatrix_mut(cur, 0, b, cur).copy_from(&rq);
            cur += b;
            let mut z = op.apply(q.as_ref());
            let h = orthogonalize(mass, v.subcols(0, cur), &mut z);
            t.submatrix_mut(0, cur - b, cur, b).copy_from(&h);
            let r = orthonormalize(mass, v.subcols(0, cur), &mut z, rng);
            q = z;
            rq = Mat::zeros(b, cur);
            rq.submatrix_mut(0, cur - b, b, b).copy_from(&r);
        }

        let mut ts = t.submatrix(0, 0, cur, cur).to_owned();
        symmetrize(&mut ts);
        let (theta, y) = sym_eig(ts.as_ref())?;
        // largest θ first
        let order: Vec<usize> = (0..cur).rev().take(p).collect();
        let yp = Mat::from_fn(cur, p, |i, j| y[(i, order[j])]);
        let theta_p: Vec<f64> = order.iter().map(|&i| theta[i]).collect();
        let x = ab(v.subcols(0, cur), yp.as_ref());

        let lambdas: Vec<f64> = theta_p[..k]
            .iter()
            .map(|&th| if th > 0.0 { shift + 1.0 / th } else { f64::INFINITY })
            .collect();
        let xk = x.subcols(0, k);
        let residuals = relative_residuals(stiffness, mass, xk, &lambdas);
        let converged = residuals
            .iter()
            .zip(&lambdas)
            .all(|(&r, &l)| l.is_finite() && r <= tol * l.abs().max(1.0));
        log::debug!(
            "lanczos cycle {cycle}: worst residual {:.3e}",
            residuals.iter().cloned().fold(0.0, f64::max)
        );
        if converged {
            return Ok(Converged {
                eigenvalues: lambdas,
                vectors: xk.to_owned(),
                cycles: cycle,
            });
        }
        last_residuals = residuals;
        if cycle == max_cycles {
            break;
        }

        // thick restart on the p leading Ritz vectors
        v.subcols_mut(0, p).copy_from(&x);
        drop(x);
        t.fill(0.0);
        for (i, &th) in theta_p.iter().enumerate() {
            t[(i, i)] = th;
        }
        rq = ab(rq.as_ref(), yp.as_ref());
        cur = p;
    }
    let worst = last_residuals.iter().cloned().fold(0.0, f64::max);
    Err(Error::NotConverged {
        iterations: max_cycles,
        worst_residual: worst,
        tolerance: tol,
        residuals: last_residuals,
    })
}
