//! Operators on the product `M × N` built from the factor matrices.
//!
//! Functions on the product grid are `n_M × n_N` matrices `F` (rows index
//! `M`). `vec(F)` stacks columns, so grid vertex `(i, p)` has linear index
//! `i + n_M·p`. With that convention the product matrices have entries
//!
//! ```text
//! S[(i,p),(j,q)] = s^M_ij s^N_pq
//! W[(i,p),(j,q)] = w^M_ij s^N_pq + s^M_ij w^N_pq
//! ```
//!
//! and act on grids as `S·vec(F) = vec(S_M F S_N)` and
//! `W·vec(F) = vec(W_M F S_N + S_M F W_N)`.

use faer::{Mat, MatRef};

use crate::error::{Error, Result};
use crate::mesh::OperatorPair;
use crate::sparse::{self, SparseMat};
use crate::spectral::dense::{ab, atb};
use crate::spectral::{EigenBasis, Provenance, SparsePencil, SymmetricPencil};

/// Largest product (rows of `W_prod`) materialized by default.
pub const DEFAULT_MATERIALIZATION_CAP: usize = 4_000_000;

/// Relative gap below which product eigenvalues count as tied.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// A function on the product vertex grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductFunction {
    values: Mat<f64>,
}

impl ProductFunction {
    pub fn new(values: Mat<f64>) -> Self {
        Self { values }
    }

    pub fn zeros(n_m: usize, n_n: usize) -> Self {
        Self::new(Mat::zeros(n_m, n_n))
    }

    pub fn from_fn(n_m: usize, n_n: usize, f: impl FnMut(usize, usize) -> f64) -> Self {
        Self::new(Mat::from_fn(n_m, n_n, f))
    }

    /// Inverse of [`ProductFunction::to_vec`].
    pub fn from_vec(n_m: usize, n_n: usize, v: &[f64]) -> Result<Self> {
        if v.len() != n_m * n_n {
            return Err(Error::dims("vectorized product function", n_m * n_n, v.len()));
        }
        Ok(Self::from_fn(n_m, n_n, |i, p| v[i + n_m * p]))
    }

    /// `φ ψᵀ`.
    pub fn outer(phi: &[f64], psi: &[f64]) -> Self {
        Self::from_fn(phi.len(), psi.len(), |i, p| phi[i] * psi[p])
    }

    /// Column-stacked values.
    pub fn to_vec(&self) -> Vec<f64> {
        let (m, n) = self.dims();
        let mut v = Vec::with_capacity(m * n);
        for p in 0..n {
            v.extend(self.values.col(p).iter().copied());
        }
        v
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.values.nrows(), self.values.ncols())
    }

    pub fn get(&self, i: usize, p: usize) -> f64 {
        self.values[(i, p)]
    }

    pub fn set(&mut self, i: usize, p: usize, v: f64) {
        self.values[(i, p)] = v;
    }

    pub fn as_mat(&self) -> MatRef<'_, f64> {
        self.values.as_ref()
    }

    pub fn into_mat(self) -> Mat<f64> {
        self.values
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.values.ncols()).map(|p| self.values[(i, p)]).collect()
    }

    pub fn max_abs(&self) -> f64 {
        let (m, n) = self.dims();
        let mut a: f64 = 0.0;
        for p in 0..n {
            for i in 0..m {
                a = a.max(self.values[(i, p)].abs());
            }
        }
        a
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        if self.dims() != other.dims() {
            return Err(Error::dims("product function", self.dims().0 * self.dims().1, other.dims().0 * other.dims().1));
        }
        let (m, n) = self.dims();
        Ok(Self::from_fn(m, n, |i, p| a * self.values[(i, p)] + b * other.values[(i, p)]))
    }
}

/// Row of a factor operator: neighbor `j` with `(w_ij, s_ij)`.
type CouplingRow = Vec<(usize, f64, f64)>;

fn coupling_rows(op: &OperatorPair) -> Vec<CouplingRow> {
    let n = op.n();
    let mut rows: Vec<std::collections::BTreeMap<usize, (f64, f64)>> = vec![Default::default(); n];
    for (r, c, v) in sparse::entries(op.stiffness().as_ref()) {
        rows[r].entry(c).or_default().0 = v;
    }
    for (r, c, v) in sparse::entries(op.mass().as_ref()) {
        rows[r].entry(c).or_default().1 = v;
    }
    rows.into_iter()
        .map(|m| m.into_iter().map(|(j, (w, s))| (j, w, s)).collect())
        .collect()
}

/// Stiffness and mass of `M × N`, applied implicitly and optionally materialized.
#[derive(Debug, Clone)]
pub struct ProductOperator {
    factor_m: OperatorPair,
    factor_n: OperatorPair,
    materialized: Option<SparsePencil>,
    rows_m: Vec<CouplingRow>,
    rows_n: Vec<CouplingRow>,
}

/// Product operator with the default materialization cap.
pub fn product_pair(op_m: &OperatorPair, op_n: &OperatorPair, materialize: bool) -> Result<ProductOperator> {
    ProductOperator::new(op_m, op_n, materialize, DEFAULT_MATERIALIZATION_CAP)
}

impl ProductOperator {
    pub fn new(op_m: &OperatorPair, op_n: &OperatorPair, materialize: bool, cap: usize) -> Result<Self> {
        let mut p = Self {
            factor_m: op_m.clone(),
            factor_n: op_n.clone(),
            materialized: None,
            rows_m: coupling_rows(op_m),
            rows_n: coupling_rows(op_n),
        };
        if materialize {
            p.materialize(cap)?;
        }
        Ok(p)
    }

    /// Builds the sparse product matrices if the grid has at most `cap` vertices.
    pub fn materialize(&mut self, cap: usize) -> Result<()> {
        if self.materialized.is_some() {
            return Ok(());
        }
        let rows = self.len();
        if rows > cap {
            return Err(Error::MaterializationCap { rows, cap });
        }
        let (m, n) = (&self.factor_m, &self.factor_n);
        let s = sparse::grid_kron(m.mass(), n.mass());
        let w = sparse::add_scaled(
            &sparse::grid_kron(m.stiffness(), n.mass()),
            &sparse::grid_kron(m.mass(), n.stiffness()),
            1.0,
        );
        self.materialized = Some(SparsePencil::new(w, s));
        Ok(())
    }

    pub fn factor_m(&self) -> &OperatorPair {
        &self.factor_m
    }

    pub fn factor_n(&self) -> &OperatorPair {
        &self.factor_n
    }

    /// `(n_M, n_N)`.
    pub fn grid(&self) -> (usize, usize) {
        (self.factor_m.n(), self.factor_n.n())
    }

    /// Number of product vertices.
    pub fn len(&self) -> usize {
        self.factor_m.n() * self.factor_n.n()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, p: usize) -> usize {
        i + self.factor_m.n() * p
    }

    pub fn coords(&self, idx: usize) -> (usize, usize) {
        let nm = self.factor_m.n();
        (idx % nm, idx / nm)
    }

    pub fn materialized(&self) -> Option<&SparsePencil> {
        self.materialized.as_ref()
    }

    pub fn materialized_stiffness(&self) -> Option<&SparseMat> {
        self.materialized.as_ref().map(|p| &p.stiffness)
    }

    pub fn materialized_mass(&self) -> Option<&SparseMat> {
        self.materialized.as_ref().map(|p| &p.mass)
    }

    fn check(&self, f: &ProductFunction) -> Result<()> {
        if f.dims() != self.grid() {
            let (a, b) = f.dims();
            return Err(Error::dims("product function", self.len(), a * b));
        }
        Ok(())
    }

    /// `F A_N` for a symmetric factor-N matrix, as `(A_N Fᵀ)ᵀ`.
    fn right(a_n: &SparseMat, f: MatRef<'_, f64>) -> Mat<f64> {
        sparse::mul(a_n, f.transpose()).transpose().to_owned()
    }

    /// `W_M F S_N + S_M F W_N`.
    pub fn apply_stiffness(&self, f: &ProductFunction) -> Result<ProductFunction> {
        self.check(f)?;
        Ok(ProductFunction::new(self.stiffness_mat(f.as_mat())))
    }

    /// `S_M F S_N`.
    pub fn apply_mass(&self, f: &ProductFunction) -> Result<ProductFunction> {
        self.check(f)?;
        Ok(ProductFunction::new(self.mass_mat(f.as_mat())))
    }

    fn stiffness_mat(&self, f: MatRef<'_, f64>) -> Mat<f64> {
        let (m, n) = (&self.factor_m, &self.factor_n);
        let fs = Self::right(n.mass(), f);
        let fw = Self::right(n.stiffness(), f);
        let mut out = sparse::mul(m.stiffness(), fs.as_ref());
        sparse::mul_into(m.mass(), fw.as_ref(), out.as_mut(), faer::Accum::Add, 1.0);
        out
    }

    fn mass_mat(&self, f: MatRef<'_, f64>) -> Mat<f64> {
        let fs = Self::right(self.factor_n.mass(), f);
        sparse::mul(self.factor_m.mass(), fs.as_ref())
    }

    /// `vec(F)ᵀ S vec(G)`.
    pub fn inner(&self, f: &ProductFunction, g: &ProductFunction) -> Result<f64> {
        self.check(f)?;
        let sg = self.apply_mass(g)?;
        let (m, n) = self.grid();
        let mut acc = 0.0;
        for p in 0..n {
            for i in 0..m {
                acc += f.values[(i, p)] * sg.values[(i, p)];
            }
        }
        Ok(acc)
    }

    pub fn norm(&self, f: &ProductFunction) -> Result<f64> {
        Ok(self.inner(f, f)?.max(0.0).sqrt())
    }

    /// `1ᵀ S 1 = (1ᵀ S_M 1)(1ᵀ S_N 1)`.
    pub fn total_mass(&self) -> f64 {
        self.factor_m.total_mass() * self.factor_n.total_mass()
    }

    /// Row sums of the product mass, `ŝ^M_i ŝ^N_p`, as a grid function.
    pub fn lumped_masses(&self) -> ProductFunction {
        let a = self.factor_m.lumped_masses();
        let b = self.factor_n.lumped_masses();
        ProductFunction::outer(&a, &b)
    }

    /// `W` and `S` restricted to the rows and columns `idx` (sorted linear
    /// indices), assembled from the factors without materializing the product.
    pub fn principal_submatrices(&self, idx: &[usize]) -> Result<(SparseMat, SparseMat)> {
        if idx.windows(2).any(|w| w[0] >= w[1]) || idx.last().is_some_and(|&l| l >= self.len()) {
            return Err(Error::InvalidArgument("indices must be sorted, unique and in range".into()));
        }
        if let Some(p) = &self.materialized {
            return Ok((
                sparse::principal_submatrix(&p.stiffness, idx),
                sparse::principal_submatrix(&p.mass, idx),
            ));
        }
        let mut local = vec![usize::MAX; self.len()];
        for (r, &g) in idx.iter().enumerate() {
            local[g] = r;
        }
        let mut wt = Vec::new();
        let mut st = Vec::new();
        for (r, &g) in idx.iter().enumerate() {
            let (i, p) = self.coords(g);
            for &(j, wm, sm) in &self.rows_m[i] {
                for &(q, wn, sn) in &self.rows_n[p] {
                    let c = local[self.index(j, q)];
                    if c == usize::MAX {
                        continue;
                    }
                    let w = wm * sn + sm * wn;
                    let s = sm * sn;
                    if w != 0.0 {
                        wt.push(faer::sparse::Triplet::new(r, c, w));
                    }
                    if s != 0.0 {
                        st.push(faer::sparse::Triplet::new(r, c, s));
                    }
                }
            }
        }
        let n = idx.len();
        Ok((sparse::from_triplets(n, n, &wt), sparse::from_triplets(n, n, &st)))
    }

    /// Product-grid neighbors of `(i, p)`: vertices `(j, q) ≠ (i, p)` with a
    /// nonzero off-diagonal stiffness coupling.
    pub fn neighbors(&self, i: usize, p: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.rows_m[i].iter().flat_map(move |&(j, wm, sm)| {
            self.rows_n[p].iter().filter_map(move |&(q, wn, sn)| {
                let v = wm * sn + sm * wn;
                ((j, q) != (i, p) && v != 0.0).then_some((j, q))
            })
        })
    }
}

impl SymmetricPencil for ProductOperator {
    fn dim(&self) -> usize {
        self.len()
    }

    fn apply_stiffness(&self, x: MatRef<'_, f64>) -> Mat<f64> {
        if let Some(p) = &self.materialized {
            return sparse::mul(&p.stiffness, x);
        }
        self.apply_columns(x, |f| self.stiffness_mat(f))
    }

    fn apply_mass(&self, x: MatRef<'_, f64>) -> Mat<f64> {
        if let Some(p) = &self.materialized {
            return sparse::mul(&p.mass, x);
        }
        self.apply_columns(x, |f| self.mass_mat(f))
    }

    fn stiffness_diagonal(&self) -> Vec<f64> {
        let (m, n) = (&self.factor_m, &self.factor_n);
        let (wm, sm) = (sparse::diagonal(m.stiffness()), sparse::diagonal(m.mass()));
        let (wn, sn) = (sparse::diagonal(n.stiffness()), sparse::diagonal(n.mass()));
        let mut d = Vec::with_capacity(self.len());
        for p in 0..n.n() {
            for i in 0..m.n() {
                d.push(wm[i] * sn[p] + sm[i] * wn[p]);
            }
        }
        d
    }

    fn mass_diagonal(&self) -> Vec<f64> {
        let sm = sparse::diagonal(self.factor_m.mass());
        let sn = sparse::diagonal(self.factor_n.mass());
        let mut d = Vec::with_capacity(self.len());
        for &b in &sn {
            for &a in &sm {
                d.push(a * b);
            }
        }
        d
    }

    fn sparse(&self) -> Option<(&SparseMat, &SparseMat)> {
        self.materialized.as_ref().map(|p| (&p.stiffness, &p.mass))
    }
}

impl ProductOperator {
    fn apply_columns(&self, x: MatRef<'_, f64>, op: impl Fn(MatRef<'_, f64>) -> Mat<f64>) -> Mat<f64> {
        let (m, n) = self.grid();
        let mut out = Mat::zeros(x.nrows(), x.ncols());
        for c in 0..x.ncols() {
            let f = Mat::from_fn(m, n, |i, p| x[(i + m * p, c)]);
            let y = op(f.as_ref());
            for p in 0..n {
                for i in 0..m {
                    out[(i + m * p, c)] = y[(i, p)];
                }
            }
        }
        out
    }
}

/// Where the cut at `k` falls relative to a group of tied eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TieSplit {
    /// First position of the tie group containing the cut.
    pub group_start: usize,
    /// One past its last position; using `k = group_end` keeps the group whole.
    pub group_end: usize,
}

/// The `k` pairs `(i, j)` with smallest `α_i + β_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairSelection {
    pub pairs: Vec<(usize, usize, f64)>,
    pub split: Option<TieSplit>,
}

fn tied(a: f64, b: f64) -> bool {
    (a - b).abs() <= TIE_TOLERANCE * a.abs().max(b.abs())
}

/// Orders all pairs by `γ = α_i + β_j`; values within [`TIE_TOLERANCE`]
/// (relative) form tie groups ordered lexicographically by `(i, j)`.
pub fn product_order(alphas: &[f64], betas: &[f64]) -> Vec<(usize, usize, f64)> {
    let mut all: Vec<(usize, usize, f64)> = alphas
        .iter()
        .enumerate()
        .flat_map(|(i, &a)| betas.iter().enumerate().map(move |(j, &b)| (i, j, a + b)))
        .collect();
    all.sort_by(|x, y| x.2.total_cmp(&y.2).then((x.0, x.1).cmp(&(y.0, y.1))));
    let mut start = 0;
    while start < all.len() {
        let mut end = start + 1;
        while end < all.len() && tied(all[end - 1].2, all[end].2) {
            end += 1;
        }
        all[start..end].sort_by_key(|x| (x.0, x.1));
        start = end;
    }
    all
}

pub fn select_pairs(alphas: &[f64], betas: &[f64], k: usize) -> Result<PairSelection> {
    let total = alphas.len() * betas.len();
    if k > total {
        return Err(Error::InvalidArgument(format!(
            "requested {k} product pairs but only {total} are available"
        )));
    }
    let all = product_order(alphas, betas);
    let mut split = None;
    if k > 0 && k < total && tied(all[k - 1].2, all[k].2) {
        let mut s = k - 1;
        while s > 0 && tied(all[s - 1].2, all[s].2) {
            s -= 1;
        }
        let mut e = k;
        while e < total && tied(all[e - 1].2, all[e].2) {
            e += 1;
        }
        split = Some(TieSplit {
            group_start: s,
            group_end: e,
        });
    }
    Ok(PairSelection {
        pairs: all[..k].to_vec(),
        split,
    })
}

/// A basis of product eigenfunctions `φ_i ψ_jᵀ`, kept in factored form.
#[derive(Debug, Clone)]
pub struct SeparableBasis {
    basis_m: EigenBasis,
    basis_n: EigenBasis,
    selection: PairSelection,
}

/// The `k` separable product eigenfunctions with smallest `γ = α_i + β_j`.
///
/// If the cut splits a group of tied eigenvalues the basis still has exactly
/// `k` elements and the split is reported by [`SeparableBasis::tie_split`].
pub fn separable_product_basis(basis_m: &EigenBasis, basis_n: &EigenBasis, k: usize) -> Result<SeparableBasis> {
    let selection = select_pairs(basis_m.eigenvalues(), basis_n.eigenvalues(), k)?;
    if let Some(s) = selection.split {
        log::warn!(
            "k = {k} splits a group of tied product eigenvalues (positions {}..{}); k = {} keeps it whole",
            s.group_start,
            s.group_end,
            s.group_end
        );
    }
    Ok(SeparableBasis {
        basis_m: basis_m.clone(),
        basis_n: basis_n.clone(),
        selection,
    })
}

impl SeparableBasis {
    pub fn len(&self) -> usize {
        self.selection.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selection.pairs.is_empty()
    }

    /// `(i, j, γ)` for each basis element, in order.
    pub fn pairs(&self) -> &[(usize, usize, f64)] {
        &self.selection.pairs
    }

    pub fn tie_split(&self) -> Option<TieSplit> {
        self.selection.split
    }

    pub fn factor_m(&self) -> &EigenBasis {
        &self.basis_m
    }

    pub fn factor_n(&self) -> &EigenBasis {
        &self.basis_n
    }

    pub fn grid(&self) -> (usize, usize) {
        (self.basis_m.dim(), self.basis_n.dim())
    }

    /// Basis element `l` on the grid.
    pub fn function(&self, l: usize) -> ProductFunction {
        let (i, j, _) = self.selection.pairs[l];
        ProductFunction::outer(&self.basis_m.vector(i), &self.basis_n.vector(j))
    }

    /// Factor residual norms `(‖r_i‖, ‖r_j‖)` of basis element `l`.
    pub fn factor_residuals(&self, l: usize) -> (f64, f64) {
        let (i, j, _) = self.selection.pairs[l];
        (self.basis_m.residual_norms()[i], self.basis_n.residual_norms()[j])
    }

    /// Materializes the vectors (dimension `n_M n_N` each).
    pub fn to_eigen_basis(&self) -> Result<EigenBasis> {
        let (m, n) = self.grid();
        let k = self.len();
        let xm = self.basis_m.full_vectors();
        let xn = self.basis_n.full_vectors();
        let mut v = Mat::zeros(m * n, k);
        for (l, &(i, j, _)) in self.selection.pairs.iter().enumerate() {
            for p in 0..n {
                let b = xn[(p, j)];
                for a in 0..m {
                    v[(a + m * p, l)] = xm[(a, i)] * b;
                }
            }
        }
        let residuals = (0..k)
            .map(|l| {
                let (a, b) = self.factor_residuals(l);
                a + b
            })
            .collect();
        EigenBasis::new(
            self.eigenvalues(),
            v,
            Provenance::ProductSeparable,
            residuals,
            self.basis_m.tolerance().max(self.basis_n.tolerance()),
        )
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.selection.pairs.iter().map(|p| p.2).collect()
    }

    /// `Φᵀ S_M F S_N Ψ`: all factor-pair coefficients of `F`.
    pub fn coefficient_matrix(&self, prod: &ProductOperator, f: &ProductFunction) -> Result<Mat<f64>> {
        let sf = prod.apply_mass(f)?;
        let xm = self.basis_m.full_vectors();
        let xn = self.basis_n.full_vectors();
        let left = atb(xm.as_ref(), sf.as_mat());
        Ok(ab(left.as_ref(), xn.as_ref()))
    }
}

/// Common interface of the bases used to encode functions on the product.
pub trait ProductBasis {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn provenance(&self) -> Provenance;

    fn eigenvalues(&self) -> Vec<f64>;

    /// `⟨ξ_ℓ, F⟩_S` for every basis element.
    fn coefficients(&self, prod: &ProductOperator, f: &ProductFunction) -> Result<Vec<f64>>;

    /// `Σ_ℓ c_ℓ ξ_ℓ` on the grid of `prod`.
    fn synthesize(&self, prod: &ProductOperator, c: &[f64]) -> Result<ProductFunction>;

    /// Orthogonal projection of `F` onto the span.
    fn project(&self, prod: &ProductOperator, f: &ProductFunction) -> Result<ProductFunction> {
        let c = self.coefficients(prod, f)?;
        self.synthesize(prod, &c)
    }
}

impl ProductBasis for SeparableBasis {
    fn len(&self) -> usize {
        SeparableBasis::len(self)
    }

    fn provenance(&self) -> Provenance {
        Provenance::ProductSeparable
    }

    fn eigenvalues(&self) -> Vec<f64> {
        SeparableBasis::eigenvalues(self)
    }

    fn coefficients(&self, prod: &ProductOperator, f: &ProductFunction) -> Result<Vec<f64>> {
        if prod.grid() != self.grid() {
            return Err(Error::dims("product grid", self.grid().0 * self.grid().1, prod.len()));
        }
        let c = self.coefficient_matrix(prod, f)?;
        Ok(self.selection.pairs.iter().map(|&(i, j, _)| c[(i, j)]).collect())
    }

    fn synthesize(&self, prod: &ProductOperator, c: &[f64]) -> Result<ProductFunction> {
        if c.len() != self.len() {
            return Err(Error::dims("coefficient count", self.len(), c.len()));
        }
        if prod.grid() != self.grid() {
            return Err(Error::dims("product grid", self.grid().0 * self.grid().1, prod.len()));
        }
        let mut cm = Mat::zeros(self.basis_m.len(), self.basis_n.len());
        for (&(i, j, _), &v) in self.selection.pairs.iter().zip(c) {
            cm[(i, j)] += v;
        }
        let xm = self.basis_m.full_vectors();
        let xn = self.basis_n.full_vectors();
        let left = ab(xm.as_ref(), cm.as_ref());
        Ok(ProductFunction::new(ab(left.as_ref(), xn.transpose())))
    }
}

impl ProductBasis for EigenBasis {
    fn len(&self) -> usize {
        EigenBasis::len(self)
    }

    fn provenance(&self) -> Provenance {
        EigenBasis::provenance(self)
    }

    fn eigenvalues(&self) -> Vec<f64> {
        EigenBasis::eigenvalues(self).to_vec()
    }

    fn coefficients(&self, prod: &ProductOperator, f: &ProductFunction) -> Result<Vec<f64>> {
        if self.dim() != prod.len() {
            return Err(Error::dims("basis dimension", prod.len(), self.dim()));
        }
        let sf = prod.apply_mass(f)?;
        Ok(self.coefficients_of_mass_weighted(&sf.to_vec()))
    }

    fn synthesize(&self, prod: &ProductOperator, c: &[f64]) -> Result<ProductFunction> {
        if self.dim() != prod.len() {
            return Err(Error::dims("basis dimension", prod.len(), self.dim()));
        }
        let (m, n) = prod.grid();
        ProductFunction::from_vec(m, n, &EigenBasis::synthesize(self, c)?)
    }
}
