//! Thin helpers around `faer`'s compressed-column sparse matrices.
//!
//! Everything here is deterministic: assembly sorts entries with a stable sort
//! before summing duplicates, so output bits do not depend on hash ordering.

use faer::sparse::{SparseColMat, SparseColMatRef, Triplet};
use faer::{Accum, Mat, MatMut, MatRef, Par};

use crate::error::{Error, Result};

pub type SparseMat = SparseColMat<usize, f64>;

/// Accumulates entries of a symmetric matrix. Off-diagonal entries are stored
/// once (in the upper triangle) and mirrored at [`SymAssembler::finish`], so
/// the result is exactly symmetric.
#[derive(Debug, Clone)]
pub struct SymAssembler {
    n: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl SymAssembler {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            entries: Vec::new(),
        }
    }

    pub fn with_capacity(n: usize, cap: usize) -> Self {
        Self {
            n,
            entries: Vec::with_capacity(cap),
        }
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (r, c) = if i <= j { (i, j) } else { (j, i) };
        self.entries.push((r, c, v));
    }

    pub fn finish(mut self) -> SparseMat {
        // column-major order, stable so duplicate summation order is fixed
        self.entries.sort_by_key(|&(r, c, _)| (c, r));
        let mut upper: Vec<(usize, usize, f64)> = Vec::with_capacity(self.entries.len());
        for (r, c, v) in self.entries {
            match upper.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => upper.push((r, c, v)),
            }
        }
        let mut triplets = Vec::with_capacity(2 * upper.len());
        for &(r, c, v) in &upper {
            triplets.push(Triplet::new(r, c, v));
            if r != c {
                triplets.push(Triplet::new(c, r, v));
            }
        }
        from_triplets(self.n, self.n, &triplets)
    }
}

pub(crate) fn from_triplets(nrows: usize, ncols: usize, t: &[Triplet<usize, usize, f64>]) -> SparseMat {
    SparseColMat::try_new_from_triplets(nrows, ncols, t)
        .expect("triplet indices are in range by construction")
}

/// Builds a matrix from arbitrary (row, col, value) triplets, summing duplicates.
pub fn from_entries(nrows: usize, ncols: usize, entries: &[(usize, usize, f64)]) -> Result<SparseMat> {
    let mut sorted: Vec<(usize, usize, f64)> = entries.to_vec();
    for &(r, c, _) in &sorted {
        if r >= nrows || c >= ncols {
            return Err(Error::InvalidArgument(format!(
                "entry ({r}, {c}) outside a {nrows}x{ncols} matrix"
            )));
        }
    }
    sorted.sort_by_key(|&(r, c, _)| (c, r));
    let mut merged: Vec<Triplet<usize, usize, f64>> = Vec::with_capacity(sorted.len());
    for (r, c, v) in sorted {
        match merged.last_mut() {
            Some(last) if last.row == r && last.col == c => last.val += v,
            _ => merged.push(Triplet::new(r, c, v)),
        }
    }
    Ok(from_triplets(nrows, ncols, &merged))
}

/// Iterates stored entries as `(row, col, value)` in column-major order.
pub fn entries(a: SparseColMatRef<'_, usize, f64>) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
    (0..a.ncols()).flat_map(move |c| {
        a.row_idx_of_col(c)
            .zip(a.val_of_col(c).iter())
            .map(move |(r, &v)| (r, c, v))
    })
}

pub fn nnz(a: &SparseMat) -> usize {
    a.compute_nnz()
}

pub fn diagonal(a: &SparseMat) -> Vec<f64> {
    let mut d = vec![0.0; a.nrows().min(a.ncols())];
    for (r, c, v) in entries(a.as_ref()) {
        if r == c {
            d[r] += v;
        }
    }
    d
}

pub fn row_sums(a: &SparseMat) -> Vec<f64> {
    let mut s = vec![0.0; a.nrows()];
    for (r, _, v) in entries(a.as_ref()) {
        s[r] += v;
    }
    s
}

pub fn diag_matrix(d: &[f64]) -> SparseMat {
    let t: Vec<_> = d.iter().enumerate().map(|(i, &v)| Triplet::new(i, i, v)).collect();
    from_triplets(d.len(), d.len(), &t)
}

/// `out = a * x`.
pub fn mul(a: &SparseMat, x: MatRef<'_, f64>) -> Mat<f64> {
    let mut out = Mat::zeros(a.nrows(), x.ncols());
    mul_into(a, x, out.as_mut(), Accum::Replace, 1.0);
    out
}

pub fn mul_into(a: &SparseMat, x: MatRef<'_, f64>, out: MatMut<'_, f64>, accum: Accum, alpha: f64) {
    faer::sparse::linalg::matmul::sparse_dense_matmul(out, accum, a.as_ref(), x, alpha, Par::Seq);
}

pub fn mul_vec(a: &SparseMat, x: &[f64]) -> Vec<f64> {
    let xm = MatRef::from_column_major_slice(x, x.len(), 1);
    let y = mul(a, xm);
    (0..y.nrows()).map(|i| y[(i, 0)]).collect()
}

/// `a + alpha * b` for matrices of equal shape.
pub fn add_scaled(a: &SparseMat, b: &SparseMat, alpha: f64) -> SparseMat {
    let mut all: Vec<(usize, usize, f64)> = entries(a.as_ref()).collect();
    all.extend(entries(b.as_ref()).map(|(r, c, v)| (r, c, alpha * v)));
    from_entries(a.nrows(), a.ncols(), &all).expect("shapes checked by caller")
}

/// Principal submatrix `a[idx, idx]`; `idx` must be strictly increasing.
pub fn principal_submatrix(a: &SparseMat, idx: &[usize]) -> SparseMat {
    let mut local = vec![usize::MAX; a.nrows()];
    for (k, &g) in idx.iter().enumerate() {
        local[g] = k;
    }
    let mut t = Vec::new();
    for (new_c, &c) in idx.iter().enumerate() {
        let col = a.as_ref();
        for (r, &v) in col.row_idx_of_col(c).zip(col.val_of_col(c).iter()) {
            let lr = local[r];
            if lr != usize::MAX {
                t.push(Triplet::new(lr, new_c, v));
            }
        }
    }
    from_triplets(idx.len(), idx.len(), &t)
}

/// Kronecker-type product on the product vertex grid.
///
/// Grid vertex `(i, p)` (with `i` on the first factor, `p` on the second) has
/// linear index `i + n_first * p`, i.e. grid functions are stored as
/// `n_first x n_second` matrices vectorized by stacking columns. The returned
/// matrix has entry `first[i, j] * second[p, q]` at row `(i, p)`, column
/// `(j, q)`. In textbook notation this is `second ⊗ first`.
pub fn grid_kron(first: &SparseMat, second: &SparseMat) -> SparseMat {
    let nf = first.nrows();
    let ns = second.nrows();
    let fe: Vec<_> = entries(first.as_ref()).collect();
    let se: Vec<_> = entries(second.as_ref()).collect();
    let mut t = Vec::with_capacity(fe.len() * se.len());
    // second-factor entries outermost gives column-major output order
    for &(p, q, sv) in &se {
        for &(i, j, fv) in &fe {
            t.push(Triplet::new(i + nf * p, j + nf * q, fv * sv));
        }
    }
    from_triplets(nf * ns, nf * ns, &t)
}

/// Dense copy, for tests and tiny problems.
pub fn to_dense(a: &SparseMat) -> Mat<f64> {
    let mut m = Mat::zeros(a.nrows(), a.ncols());
    for (r, c, v) in entries(a.as_ref()) {
        m[(r, c)] += v;
    }
    m
}

pub fn is_symmetric(a: &SparseMat) -> bool {
    if a.nrows() != a.ncols() {
        return false;
    }
    let at = a.as_ref().transpose().to_col_major().expect("allocation");
    let x: Vec<_> = entries(a.as_ref()).collect();
    let y: Vec<_> = entries(at.as_ref()).collect();
    x == y
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn assembler_mirrors_and_sums() {
        let mut a = SymAssembler::new(3);
        a.add(0, 1, 1.0);
        a.add(1, 0, 2.0);
        a.add(2, 2, 5.0);
        let m = a.finish();
        let d = to_dense(&m);
        assert_eq!(d[(0, 1)], 3.0);
        assert_eq!(d[(1, 0)], 3.0);
        assert_eq!(d[(2, 2)], 5.0);
        assert!(is_symmetric(&m));
    }

    #[test]
    fn grid_kron_matches_index_convention() {
        let f = from_entries(2, 2, &[(0, 0, 1.0), (0, 1, 2.0), (1, 0, 3.0), (1, 1, 4.0)]).unwrap();
        let s = from_entries(3, 3, &[(0, 0, 1.0), (1, 2, 5.0), (2, 1, 7.0)]).unwrap();
        let k = to_dense(&grid_kron(&f, &s));
        let (fd, sd) = (to_dense(&f), to_dense(&s));
        for i in 0..2 {
            for j in 0..2 {
                for p in 0..3 {
                    for q in 0..3 {
                        assert_eq!(k[(i + 2 * p, j + 2 * q)], fd[(i, j)] * sd[(p, q)]);
                    }
                }
            }
        }
    }

    #[test]
    fn principal_submatrix_selects_rows_and_columns() {
        let a = from_entries(3, 3, &[(0, 0, 1.0), (0, 2, 2.0), (2, 0, 2.0), (1, 1, 3.0), (2, 2, 4.0)]).unwrap();
        let s = to_dense(&principal_submatrix(&a, &[0, 2]));
        assert_eq!(s.nrows(), 2);
        assert_eq!(s[(0, 1)], 2.0);
        assert_eq!(s[(1, 1)], 4.0);
    }

    #[test]
    fn out_of_range_entry_is_rejected() {
        assert!(from_entries(2, 2, &[(2, 0, 1.0)]).is_err());
    }
}
