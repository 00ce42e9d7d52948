//! Smallest eigenpairs of symmetric generalized eigenproblems `W x = λ S x`.

mod basis;
pub(crate) mod dense;
mod lanczos;
mod lobpcg;
mod pencil;

use faer::{Mat, MatRef};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use basis::{manifest_path, EigenBasis, Provenance};
pub use dense::generalized_eig;
pub use pencil::{MatrixFree, SparsePencil, SymmetricPencil};

use crate::error::{Error, Result};
use crate::sparse::{self, SparseMat};

/// Solver settings. The defaults are used by every front end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EigsOptions {
    /// Convergence threshold on `‖Wx − λSx‖ / ‖Sx‖`, relative to `max(1, |λ|)`.
    pub tol: f64,
    /// Seed of the random starting block.
    pub seed: u64,
    /// Restart cycles of the Krylov solver (LOBPCG gets 20 iterations per cycle).
    pub max_cycles: usize,
    /// Dimension of the Krylov search space; `None` picks `max(2k, k + 8)`,
    /// reduced to fit the memory budget.
    pub subspace: Option<usize>,
    /// Approximate working-memory budget for the Krylov basis, in bytes.
    pub memory_budget: usize,
    /// Problems up to this dimension are solved densely.
    pub dense_threshold: usize,
}

impl Default for EigsOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            seed: 0,
            max_cycles: 300,
            subspace: None,
            memory_budget: 1536 << 20,
            dense_threshold: 600,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct SolverPlan {
    pub k: usize,
    pub block: usize,
    pub keep: usize,
    pub subspace: usize,
    pub tol: f64,
    pub max_cycles: usize,
    pub shift: f64,
}

pub(crate) struct Converged {
    pub eigenvalues: Vec<f64>,
    pub vectors: Mat<f64>,
    #[allow(dead_code)]
    pub cycles: usize,
}

/// `‖W x_j − λ_j S x_j‖ / ‖S x_j‖` for each column.
pub(crate) fn relative_residuals(w: &SparseMat, s: &SparseMat, x: MatRef<'_, f64>, lambdas: &[f64]) -> Vec<f64> {
    let wx = sparse::mul(w, x);
    let sx = sparse::mul(s, x);
    residual_norms(&wx, &sx, lambdas)
}

fn residual_norms(wx: &Mat<f64>, sx: &Mat<f64>, lambdas: &[f64]) -> Vec<f64> {
    lambdas
        .iter()
        .enumerate()
        .map(|(j, &l)| {
            let mut r2 = 0.0;
            let mut s2 = 0.0;
            for i in 0..wx.nrows() {
                let r = wx[(i, j)] - l * sx[(i, j)];
                r2 += r * r;
                s2 += sx[(i, j)] * sx[(i, j)];
            }
            (r2 / s2).sqrt()
        })
        .collect()
}

/// Residual norms of arbitrary pairs against a pencil.
pub fn pencil_residuals<P: SymmetricPencil + ?Sized>(pencil: &P, x: MatRef<'_, f64>, lambdas: &[f64]) -> Vec<f64> {
    let wx = pencil.apply_stiffness(x);
    let sx = pencil.apply_mass(x);
    residual_norms(&wx, &sx, lambdas)
}

/// Shape of the Krylov iteration for `k` pairs of dimension `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KrylovDims {
    /// Vectors added per Lanczos step.
    pub block: usize,
    /// Ritz vectors kept at a restart.
    pub keep: usize,
    /// Search-space dimension reached before each restart.
    pub subspace: usize,
}

pub fn krylov_dims(n: usize, k: usize, opts: &EigsOptions) -> KrylovDims {
    let block = (k / 10).clamp(4, 16);
    let mut m = opts.subspace.unwrap_or((2 * k).max(k + 8)).max(k + 2 * block);
    // basis, restart copy, Ritz vectors and work blocks
    let need = |m: usize| 8 * n * (m + (m + k) / 2 + 2 * k + 4 * block);
    while m > k + 2 * block && need(m) > opts.memory_budget {
        m = (m * 9 / 10).max(k + 2 * block);
    }
    let m = m.min(n);
    let keep = (k + (m - k) / 2).min(m - block.min(m - k)).max(k);
    KrylovDims {
        block: block.min(m - keep).max(1),
        keep,
        subspace: m,
    }
}

/// Default shift: a small negative multiple of the spectral scale `tr W / tr S`.
pub fn default_shift(w_diag: &[f64], s_diag: &[f64]) -> f64 {
    let tw: f64 = w_diag.iter().sum();
    let ts: f64 = s_diag.iter().sum();
    let scale = if tw > 0.0 && ts > 0.0 { tw / ts } else { 1.0 };
    -1e-6 * scale
}

/// The `k` smallest eigenpairs, tagged as a global factor basis.
pub fn eigs_smallest<P: SymmetricPencil + ?Sized>(pencil: &P, k: usize, opts: &EigsOptions) -> Result<EigenBasis> {
    eigs_smallest_as(pencil, k, opts, Provenance::GlobalFactor)
}

/// As [`eigs_smallest`], with an explicit provenance tag.
pub fn eigs_smallest_as<P: SymmetricPencil + ?Sized>(
    pencil: &P,
    k: usize,
    opts: &EigsOptions,
    provenance: Provenance,
) -> Result<EigenBasis> {
    let n = pencil.dim();
    if k >= n {
        return Err(Error::InvalidArgument(format!(
            "requested {k} eigenpairs of a problem of dimension {n}; k must be smaller than the dimension"
        )));
    }
    if k == 0 {
        return Ok(EigenBasis::empty(n, provenance));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut out = if n <= opts.dense_threshold {
        solve_dense(pencil, k)?
    } else if let Some((w, s)) = pencil.sparse() {
        let dims = krylov_dims(n, k, opts);
        let plan = SolverPlan {
            k,
            block: dims.block,
            keep: dims.keep,
            subspace: dims.subspace,
            tol: opts.tol,
            max_cycles: opts.max_cycles,
            shift: default_shift(&sparse::diagonal(w), &sparse::diagonal(s)),
        };
        lanczos::solve(w, s, &plan, &mut rng)?
    } else {
        lobpcg::solve(pencil, k, opts.tol, opts.max_cycles.saturating_mul(20).max(1000), &mut rng)?
    };
    dense::fix_signs(&mut out.vectors);
    let residuals = pencil_residuals(pencil, out.vectors.as_ref(), &out.eigenvalues);
    let worst = residuals
        .iter()
        .zip(&out.eigenvalues)
        .map(|(r, l)| r / l.abs().max(1.0))
        .fold(0.0, f64::max);
    if worst > opts.tol {
        log::warn!("eigenpair residual {worst:.2e} exceeds tolerance {:.1e}", opts.tol);
    }
    EigenBasis::new(out.eigenvalues, out.vectors, provenance, residuals, opts.tol)
}

fn solve_dense<P: SymmetricPencil + ?Sized>(pencil: &P, k: usize) -> Result<Converged> {
    let (w, s) = match pencil.sparse() {
        Some((w, s)) => (sparse::to_dense(w), sparse::to_dense(s)),
        None => {
            let id = Mat::<f64>::identity(pencil.dim(), pencil.dim());
            let mut w = pencil.apply_stiffness(id.as_ref());
            let mut s = pencil.apply_mass(id.as_ref());
            dense::symmetrize(&mut w);
            dense::symmetrize(&mut s);
            (w, s)
        }
    };
    let (vals, x) = generalized_eig(w.as_ref(), s.as_ref())?;
    Ok(Converged {
        eigenvalues: vals[..k].to_vec(),
        vectors: x.subcols(0, k).to_owned(),
        cycles: 0,
    })
}
