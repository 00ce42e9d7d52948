//! Locally optimal block preconditioned conjugate gradient for pencils that
//! are only available through operator application.

use faer::Mat;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

use super::dense::{ab, atb, col_norm, sym_eig, symmetrize};
use super::pencil::SymmetricPencil;
use super::Converged;

/// S-orthonormal basis of span(Z) by SVQB; dependent directions are dropped.
fn svqb<P: SymmetricPencil + ?Sized>(pencil: &P, z: &Mat<f64>) -> Result<Mat<f64>> {
    let sz = pencil.apply_mass(z.as_ref());
    let mut g = atb(z.as_ref(), sz.as_ref());
    symmetrize(&mut g);
    let m = g.ncols();
    let d: Vec<f64> = (0..m).map(|i| 1.0 / g[(i, i)].max(f64::MIN_POSITIVE).sqrt()).collect();
    let scaled = Mat::from_fn(m, m, |i, j| g[(i, j)] * d[i] * d[j]);
    let (vals, u) = sym_eig(scaled.as_ref())?;
    let top = vals.last().copied().unwrap_or(0.0);
    let keep: Vec<usize> = (0..m).filter(|&i| vals[i] > 1e-12 * top).collect();
    let b = Mat::from_fn(m, keep.len(), |i, j| d[i] * u[(i, keep[j])] / vals[keep[j]].sqrt());
    Ok(b)
}

pub(crate) fn solve<P: SymmetricPencil + ?Sized>(
    pencil: &P,
    k: usize,
    tol: f64,
    max_iterations: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Converged> {
    let n = pencil.dim();
    let bx = (k + k.min(8)).min(n / 3).max(k);
    let wd = pencil.stiffness_diagonal();
    let sd = pencil.mass_diagonal();
    let trace_ratio = wd.iter().sum::<f64>() / sd.iter().sum::<f64>();

    let x0 = Mat::from_fn(n, bx, |_, _| rng.random_range(-1.0..1.0));
    let b0 = svqb(pencil, &x0)?;
    let mut x = ab(x0.as_ref(), b0.as_ref());
    let mut p: Option<Mat<f64>> = None;
    let mut theta = vec![0.0; bx];
    // initial Rayleigh–Ritz
    {
        let wx = pencil.apply_stiffness(x.as_ref());
        let mut a = atb(x.as_ref(), wx.as_ref());
        symmetrize(&mut a);
        let (vals, c) = sym_eig(a.as_ref())?;
        x = ab(x.as_ref(), c.subcols(0, x.ncols()));
        theta.copy_from_slice(&vals[..bx.min(vals.len())]);
    }

    let mut last = vec![f64::INFINITY; k];
    for it in 0..max_iterations {
        let wx = pencil.apply_stiffness(x.as_ref());
        let sx = pencil.apply_mass(x.as_ref());
        let mut r = wx.clone();
        for j in 0..bx {
            for i in 0..n {
                r[(i, j)] -= theta[j] * sx[(i, j)];
            }
        }
        let residuals: Vec<f64> = (0..k)
            .map(|j| col_norm(r.as_ref(), j) / col_norm(sx.as_ref(), j))
            .collect();
        if residuals
            .iter()
            .zip(&theta)
            .all(|(&res, &l)| res <= tol * l.abs().max(1.0))
        {
            return Ok(Converged {
                eigenvalues: theta[..k].to_vec(),
                vectors: x.subcols(0, k).to_owned(),
                cycles: it,
            });
        }
        last = residuals;

        let shift = theta[bx - 1].abs().max(1e-6 * trace_ratio);
        let h = Mat::from_fn(n, bx, |i, j| r[(i, j)] / (wd[i] + shift * sd[i]));
        let nz = bx + h.ncols() + p.as_ref().map_or(0, |m| m.ncols());
        let mut z = Mat::zeros(n, nz);
        z.subcols_mut(0, bx).copy_from(&x);
        z.subcols_mut(bx, bx).copy_from(&h);
        if let Some(pm) = &p {
            z.subcols_mut(2 * bx, pm.ncols()).copy_from(pm);
        }
        drop(h);
        let basis = svqb(pencil, &z)?;
        let zb = ab(z.as_ref(), basis.as_ref());
        let wz = pencil.apply_stiffness(zb.as_ref());
        let mut a = atb(zb.as_ref(), wz.as_ref());
        symmetrize(&mut a);
        let (vals, c) = sym_eig(a.as_ref())?;
        if vals.len() < bx {
            return Err(Error::Factorization("LOBPCG basis collapsed".into()));
        }
        let cb = c.subcols(0, bx);
        x = ab(zb.as_ref(), cb);
        theta.copy_from_slice(&vals[..bx]);
        // search direction: the part of the new iterate outside the old X block
        let coeff = ab(basis.as_ref(), cb);
        let tail = coeff.subrows(bx, nz - bx);
        p = Some(ab(z.subcols(bx, nz - bx), tail));
    }
    let worst = last.iter().cloned().fold(0.0, f64::max);
    Err(Error::NotConverged {
        iterations: max_iterations,
        worst_residual: worst,
        tolerance: tol,
        residuals: last,
    })
}
