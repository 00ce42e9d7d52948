//! Patches and potentials on the product grid, and the localized bases they
//! induce: Dirichlet harmonics of a patch and Hamiltonian eigenfunctions.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::maps::PointMap;
use crate::mesh::{EdgeGraph, Shape};
use crate::product::{ProductFunction, ProductOperator};
use crate::sparse;
use crate::spectral::{eigs_smallest_as, EigenBasis, EigsOptions, Provenance, SparsePencil};

/// A set of product-grid vertices split into interior and boundary.
///
/// A vertex is on the boundary when one of its product-grid neighbors (a
/// nonzero off-diagonal stiffness coupling) lies outside the set.
#[derive(Debug, Clone, PartialEq)]
pub struct Patch {
    grid: (usize, usize),
    /// Sorted linear indices `i + n_M·p`.
    vertices: Vec<usize>,
    interior: Vec<bool>,
    area_fraction: f64,
}

impl Patch {
    /// Builds a patch from arbitrary linear indices (duplicates are ignored).
    pub fn from_indices(prod: &ProductOperator, mut vertices: Vec<usize>) -> Result<Self> {
        vertices.sort_unstable();
        vertices.dedup();
        if vertices.last().is_some_and(|&v| v >= prod.len()) {
            return Err(Error::InvalidArgument("patch vertex outside the product grid".into()));
        }
        let mut member = vec![false; prod.len()];
        for &v in &vertices {
            member[v] = true;
        }
        let interior = vertices
            .iter()
            .map(|&v| {
                let (i, p) = prod.coords(v);
                prod.neighbors(i, p).all(|(j, q)| member[prod.index(j, q)])
            })
            .collect();
        let lm = prod.factor_m().lumped_masses();
        let ln = prod.factor_n().lumped_masses();
        let covered: f64 = vertices
            .iter()
            .map(|&v| {
                let (i, p) = prod.coords(v);
                lm[i] * ln[p]
            })
            .sum();
        Ok(Self {
            grid: prod.grid(),
            vertices,
            interior,
            area_fraction: covered / prod.total_mass(),
        })
    }

    pub fn from_pairs(prod: &ProductOperator, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let (m, n) = prod.grid();
        let mut idx = Vec::new();
        for (i, p) in pairs {
            if i >= m || p >= n {
                return Err(Error::InvalidArgument(format!("patch vertex ({i}, {p}) outside the grid")));
            }
            idx.push(prod.index(i, p));
        }
        Self::from_indices(prod, idx)
    }

    pub fn full(prod: &ProductOperator) -> Self {
        Self::from_indices(prod, (0..prod.len()).collect()).expect("in range")
    }

    pub fn grid(&self) -> (usize, usize) {
        self.grid
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn contains(&self, idx: usize) -> bool {
        self.vertices.binary_search(&idx).is_ok()
    }

    pub fn interior(&self) -> Vec<usize> {
        self.vertices
            .iter()
            .zip(&self.interior)
            .filter_map(|(&v, &b)| b.then_some(v))
            .collect()
    }

    pub fn boundary(&self) -> Vec<usize> {
        self.vertices
            .iter()
            .zip(&self.interior)
            .filter_map(|(&v, &b)| (!b).then_some(v))
            .collect()
    }

    pub fn interior_len(&self) -> usize {
        self.interior.iter().filter(|&&b| b).count()
    }

    /// Lumped product mass over the patch divided by the total product mass.
    pub fn area_fraction(&self) -> f64 {
        self.area_fraction
    }

    /// Adds every product-grid neighbor of the patch.
    pub fn dilate(&self, prod: &ProductOperator) -> Result<Self> {
        let mut idx = self.vertices.clone();
        for &v in &self.vertices {
            let (i, p) = prod.coords(v);
            idx.extend(prod.neighbors(i, p).map(|(j, q)| prod.index(j, q)));
        }
        Self::from_indices(prod, idx)
    }

    pub fn intersect(&self, other: &Patch, prod: &ProductOperator) -> Result<Self> {
        let idx = self.vertices.iter().copied().filter(|&v| other.contains(v)).collect();
        Self::from_indices(prod, idx)
    }

    /// Header `nM nN count`, then `i p tag` with tag `I` (interior) or `B`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} {} {}", self.grid.0, self.grid.1, self.vertices.len());
        let _ = writeln!(s, "# area_fraction {}", self.area_fraction);
        let nm = self.grid.0;
        let mut rows: Vec<(usize, usize, bool)> = self
            .vertices
            .iter()
            .zip(&self.interior)
            .map(|(&v, &b)| (v % nm, v / nm, b))
            .collect();
        rows.sort_unstable();
        for (i, p, b) in rows {
            let _ = writeln!(s, "{i} {p} {}", if b { 'I' } else { 'B' });
        }
        s
    }

    /// Reads a patch file; the interior/boundary split is recomputed for `prod`.
    pub fn parse(text: &str, prod: &ProductOperator, context: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (ln, header) = lines.next().ok_or_else(|| Error::parse(context, 0, "empty file"))?;
        let h: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| Error::parse(context, ln, "header must be `nM nN count`")))
            .collect::<Result<_>>()?;
        if h.len() != 3 {
            return Err(Error::parse(context, ln, "header must be `nM nN count`"));
        }
        if (h[0], h[1]) != prod.grid() {
            return Err(Error::parse(
                context,
                ln,
                format!("patch is for a {}x{} grid, operators are {}x{}", h[0], h[1], prod.grid().0, prod.grid().1),
            ));
        }
        let mut pairs = Vec::with_capacity(h[2]);
        for (ln, line) in lines {
            let t: Vec<&str> = line.split_whitespace().collect();
            if t.len() < 2 {
                return Err(Error::parse(context, ln, "expected `i p [tag]`"));
            }
            let i = t[0].parse().map_err(|_| Error::parse(context, ln, "bad index"))?;
            let p = t[1].parse().map_err(|_| Error::parse(context, ln, "bad index"))?;
            pairs.push((i, p));
        }
        if pairs.len() != h[2] {
            return Err(Error::parse(context, 0, format!("header announces {} vertices, found {}", h[2], pairs.len())));
        }
        Self::from_pairs(prod, pairs)
    }

    pub fn load(path: impl AsRef<Path>, prod: &ProductOperator) -> Result<Self> {
        let path = path.as_ref();
        Self::parse(&crate::io::read_text(path)?, prod, &path.display().to_string())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        crate::io::write_atomic(path, self.to_text().as_bytes())
    }
}

/// Band size: a product-distance radius or a target area fraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BandSize {
    /// In the length units of the meshes.
    Radius(f64),
    /// Fraction of the total product area, matched within 2% (relative).
    AreaFraction(f64),
}

/// Product distance `min_s √(d_M(x, x_s)² + d_N(y, y_s)²)` to a seed set.
pub fn seed_distance_field(seeds: &[(usize, usize)], shape_m: &Shape, shape_n: &Shape) -> Result<ProductFunction> {
    if seeds.is_empty() {
        return Err(Error::InvalidArgument("band construction needs at least one seed".into()));
    }
    let (nm, nn) = (shape_m.len(), shape_n.len());
    let gm = EdgeGraph::of(shape_m);
    let gn = EdgeGraph::of(shape_n);
    let mut cache_m = std::collections::HashMap::new();
    let mut cache_n = std::collections::HashMap::new();
    let mut best = vec![f64::INFINITY; nm * nn];
    for &(xs, ys) in seeds {
        if xs >= nm || ys >= nn {
            return Err(Error::InvalidArgument(format!("seed ({xs}, {ys}) outside the grid")));
        }
        if !cache_m.contains_key(&xs) {
            let d: Vec<f64> = gm.distances_from(&[xs])?.distances.iter().map(|d| d * d).collect();
            cache_m.insert(xs, d);
        }
        if !cache_n.contains_key(&ys) {
            let d: Vec<f64> = gn.distances_from(&[ys])?.distances.iter().map(|d| d * d).collect();
            cache_n.insert(ys, d);
        }
        let (dm, dn) = (&cache_m[&xs], &cache_n[&ys]);
        for p in 0..nn {
            let row = &mut best[nm * p..nm * (p + 1)];
            for (i, b) in row.iter_mut().enumerate() {
                let v = dm[i] + dn[p];
                if v < *b {
                    *b = v;
                }
            }
        }
    }
    ProductFunction::from_vec(nm, nn, &best.iter().map(|v| v.sqrt()).collect::<Vec<_>>())
}

/// Seeds of a point map, as grid pairs.
pub fn seeds_of(pm: &PointMap) -> Vec<(usize, usize)> {
    pm.pairs().collect()
}

/// The band `{(x, y) : dist((x, y), seeds) ≤ r}` around a seed set.
///
/// With an area fraction, `r` is found by bisection until the covered
/// fraction is within 2% (relative) of the target.
pub fn band_patch(
    seeds: &[(usize, usize)],
    shape_m: &Shape,
    shape_n: &Shape,
    prod: &ProductOperator,
    size: BandSize,
) -> Result<(Patch, f64)> {
    if prod.grid() != (shape_m.len(), shape_n.len()) {
        return Err(Error::dims("product grid", prod.len(), shape_m.len() * shape_n.len()));
    }
    let dist = seed_distance_field(seeds, shape_m, shape_n)?.to_vec();
    let within = |r: f64| -> Vec<usize> { (0..dist.len()).filter(|&v| dist[v] <= r).collect() };
    match size {
        BandSize::Radius(r) => {
            if !(r >= 0.0) {
                return Err(Error::InvalidArgument(format!("band radius {r} must be nonnegative")));
            }
            Ok((Patch::from_indices(prod, within(r))?, r))
        }
        BandSize::AreaFraction(target) => {
            if !(target > 0.0 && target <= 1.0) {
                return Err(Error::InvalidArgument(format!("area fraction {target} must lie in (0, 1]")));
            }
            let lumped = prod.lumped_masses().to_vec();
            let total = prod.total_mass();
            let fraction = |r: f64| -> f64 { (0..dist.len()).filter(|&v| dist[v] <= r).map(|v| lumped[v]).sum::<f64>() / total };
            let ok = |f: f64| (f - target).abs() <= 0.02 * target;
            let (mut lo, mut hi) = (0.0, dist.iter().cloned().filter(|d| d.is_finite()).fold(0.0, f64::max));
            let mut r = hi;
            for _ in 0..200 {
                r = 0.5 * (lo + hi);
                let f = fraction(r);
                if ok(f) {
                    break;
                }
                if f < target {
                    lo = r;
                } else {
                    hi = r;
                }
            }
            let f = fraction(r);
            if !ok(f) {
                // the covered area jumps past the target at a single radius
                if ok(fraction(hi)) {
                    r = hi;
                } else {
                    return Err(Error::InvalidArgument(format!(
                        "area fraction {target} is not reachable within 2% (closest {f:.4})"
                    )));
                }
            }
            Ok((Patch::from_indices(prod, within(r))?, r))
        }
    }
}

/// Dirichlet eigenfunctions of the patch: the pencil restricted to the
/// interior, extended by zero on the boundary and outside.
pub fn patch_dirichlet_basis(prod: &ProductOperator, patch: &Patch, k: usize, opts: &EigsOptions) -> Result<EigenBasis> {
    if patch.grid() != prod.grid() {
        return Err(Error::dims("patch grid", prod.len(), patch.grid().0 * patch.grid().1));
    }
    let interior = patch.interior();
    if interior.len() <= k {
        return Err(Error::InvalidArgument(format!(
            "patch interior has {} vertices; need more than k = {k}",
            interior.len()
        )));
    }
    let (w, s) = prod.principal_submatrices(&interior)?;
    let pencil = SparsePencil::new(w, s);
    let b = eigs_smallest_as(&pencil, k, opts, Provenance::PatchDirichlet)?;
    EigenBasis::with_support(
        b.eigenvalues().to_vec(),
        b.stored_vectors().to_owned(),
        Some(interior),
        prod.len(),
        Provenance::PatchDirichlet,
        b.residual_norms().to_vec(),
        b.tolerance(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PotentialKind {
    /// `0` on a patch, `ν` elsewhere.
    Step { nu: f64 },
    /// `1 − μ`.
    Soft,
    /// Read from a file without a kind tag.
    Custom,
}

/// Nonnegative potential on the product grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    values: ProductFunction,
    kind: PotentialKind,
}

impl Potential {
    pub fn new(values: ProductFunction, kind: PotentialKind) -> Result<Self> {
        let (m, n) = values.dims();
        for p in 0..n {
            for i in 0..m {
                let v = values.get(i, p);
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(Error::InvalidArgument(format!("potential value {v} at ({i}, {p}) is not a finite nonnegative number")));
                }
            }
        }
        Ok(Self { values, kind })
    }

    /// `0` on the patch, `ν ≥ 1` elsewhere.
    pub fn step(patch: &Patch, nu: f64) -> Result<Self> {
        if !(nu >= 1.0) {
            return Err(Error::InvalidArgument(format!("step height ν = {nu} must be at least 1")));
        }
        let (m, n) = patch.grid();
        let mut v = ProductFunction::from_fn(m, n, |_, _| nu);
        for &idx in patch.vertices() {
            v.set(idx % m, idx / m, 0.0);
        }
        Self::new(v, PotentialKind::Step { nu })
    }

    /// `1 − μ` for a density with values in `[0, 1]`.
    pub fn soft(mu: &ProductFunction) -> Result<Self> {
        let (m, n) = mu.dims();
        for p in 0..n {
            for i in 0..m {
                let v = mu.get(i, p);
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::InvalidArgument(format!(
                        "soft potential needs μ in [0, 1]; μ({i}, {p}) = {v}"
                    )));
                }
            }
        }
        Self::new(ProductFunction::from_fn(m, n, |i, p| 1.0 - mu.get(i, p)), PotentialKind::Soft)
    }

    pub fn values(&self) -> &ProductFunction {
        &self.values
    }

    pub fn kind(&self) -> PotentialKind {
        self.kind
    }

    /// Header `nM nN nnz`, then `i p value` for nonzero values.
    pub fn to_text(&self) -> String {
        let (m, n) = self.values.dims();
        let mut body = String::new();
        let mut nnz = 0;
        for i in 0..m {
            for p in 0..n {
                let v = self.values.get(i, p);
                if v != 0.0 {
                    nnz += 1;
                    let _ = writeln!(body, "{i} {p} {v:e}");
                }
            }
        }
        let kind = match self.kind {
            PotentialKind::Step { nu } => format!("step {nu}"),
            PotentialKind::Soft => "soft".into(),
            PotentialKind::Custom => "custom".into(),
        };
        format!("{m} {n} {nnz}\n# kind {kind}\n{body}")
    }

    pub fn parse(text: &str, context: &str) -> Result<Self> {
        let mut kind = PotentialKind::Custom;
        let mut filtered = String::new();
        for line in text.lines() {
            let t = line.trim();
            if let Some(rest) = t.strip_prefix("# kind") {
                let mut it = rest.split_whitespace();
                kind = match (it.next(), it.next().and_then(|v| v.parse().ok())) {
                    (Some("step"), Some(nu)) => PotentialKind::Step { nu },
                    (Some("soft"), _) => PotentialKind::Soft,
                    _ => PotentialKind::Custom,
                };
            } else {
                filtered.push_str(line);
                filtered.push('\n');
            }
        }
        let d = crate::maps::MapDensity::parse(&filtered, context)?;
        Self::new(d.to_function(), kind)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::parse(&crate::io::read_text(path)?, &path.display().to_string())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        crate::io::write_atomic(path, self.to_text().as_bytes())
    }
}

/// Eigenpairs of `(W + S_V, S)` with `S_V = diag(V · ŝ)` on the lumped product masses.
pub fn hamiltonian_basis(prod: &ProductOperator, v: &Potential, k: usize, opts: &EigsOptions) -> Result<EigenBasis> {
    if v.values().dims() != prod.grid() {
        return Err(Error::dims("potential grid", prod.len(), v.values().dims().0 * v.values().dims().1));
    }
    let all: Vec<usize> = (0..prod.len()).collect();
    let (w, s) = prod.principal_submatrices(&all)?;
    let lumped = prod.lumped_masses().to_vec();
    let vv = v.values().to_vec();
    let sv: Vec<f64> = vv.iter().zip(&lumped).map(|(a, b)| a * b).collect();
    let h = sparse::add_scaled(&w, &sparse::diag_matrix(&sv), 1.0);
    eigs_smallest_as(&SparsePencil::new(h, s), k, opts, Provenance::Hamiltonian)
}

/// Which factor an energy marginal lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    M,
    N,
}

/// `m(x) = Σ_y F(x, y)² w(y)` (side `M`) or `m(y) = Σ_x F(x, y)² w(x)` (side `N`),
/// where `w` are quadrature weights on the other factor.
pub fn energy_marginal(f: &ProductFunction, side: Side, other_masses: &[f64]) -> Result<Vec<f64>> {
    let (m, n) = f.dims();
    match side {
        Side::M => {
            if other_masses.len() != n {
                return Err(Error::dims("target masses", n, other_masses.len()));
            }
            Ok((0..m)
                .map(|i| (0..n).map(|p| f.get(i, p).powi(2) * other_masses[p]).sum())
                .collect())
        }
        Side::N => {
            if other_masses.len() != m {
                return Err(Error::dims("source masses", m, other_masses.len()));
            }
            Ok((0..n)
                .map(|p| (0..m).map(|i| f.get(i, p).powi(2) * other_masses[i]).sum())
                .collect())
        }
    }
}

/// `∫_{outside P} F² / ∫ F²` with lumped product quadrature.
pub fn outside_energy_fraction(f: &ProductFunction, patch: &Patch, prod: &ProductOperator) -> f64 {
    let lumped = prod.lumped_masses().to_vec();
    let v = f.to_vec();
    let mut inside = 0.0;
    let mut total = 0.0;
    for (idx, (x, w)) in v.iter().zip(&lumped).enumerate() {
        let e = x * x * w;
        total += e;
        if patch.contains(idx) {
            inside += e;
        }
    }
    if total > 0.0 {
        (total - inside) / total
    } else {
        0.0
    }
}

/// Relative Frobenius error of the best rank-one approximation of `F`.
pub fn rank_one_error(f: &ProductFunction) -> Result<f64> {
    let svd = f
        .as_mat()
        .thin_svd()
        .map_err(|e| Error::Factorization(format!("SVD failed: {e:?}")))?;
    let s = svd.S().column_vector();
    let total: f64 = s.iter().map(|v| v * v).sum();
    if total == 0.0 {
        return Ok(0.0);
    }
    let first = s[0] * s[0];
    Ok(((total - first).max(0.0) / total).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{assemble_1d, lump_mass, CurveMesh};
    use crate::product::product_pair;
    use crate::spectral::eigs_smallest;
    use std::f64::consts::PI;

    fn circle(n: usize) -> CurveMesh {
        let pts = (0..n)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / n as f64;
                vec![t.cos(), t.sin()]
            })
            .collect();
        CurveMesh::new(pts).unwrap()
    }

    fn setup(n: usize) -> (Shape, ProductOperator) {
        let c = circle(n);
        let op = assemble_1d(&c);
        (Shape::Curve(c), product_pair(&op, &op, false).unwrap())
    }

    #[test]
    fn zero_radius_is_the_seed_set() {
        let (s, prod) = setup(12);
        let seeds: Vec<_> = (0..12).map(|i| (i, i)).collect();
        let (p, _) = band_patch(&seeds, &s, &s, &prod, BandSize::Radius(0.0)).unwrap();
        assert_eq!(p.len(), 12);
        assert_eq!(p.interior_len(), 0);
        let (full, _) = band_patch(&seeds, &s, &s, &prod, BandSize::Radius(10.0)).unwrap();
        assert_eq!(full.len(), 144);
        assert!((full.area_fraction() - 1.0).abs() < 1e-12);
        assert!(full.boundary().is_empty());
        assert!(band_patch(&[], &s, &s, &prod, BandSize::Radius(1.0)).is_err());
    }

    #[test]
    fn area_fraction_bisection() {
        let (s, prod) = setup(60);
        let seeds: Vec<_> = (0..60).map(|i| (i, i)).collect();
        for target in [0.05, 0.25, 0.9] {
            let (p, _) = band_patch(&seeds, &s, &s, &prod, BandSize::AreaFraction(target)).unwrap();
            assert!((p.area_fraction() - target).abs() <= 0.02 * target, "{target}: {}", p.area_fraction());
        }
    }

    #[test]
    fn dirichlet_basis_vanishes_off_interior() {
        let (s, prod) = setup(24);
        let seeds: Vec<_> = (0..24).map(|i| (i, i)).collect();
        let (p, _) = band_patch(&seeds, &s, &s, &prod, BandSize::AreaFraction(0.3)).unwrap();
        let b = patch_dirichlet_basis(&prod, &p, 8, &EigsOptions::default()).unwrap();
        assert!(b.eigenvalues()[0] > 0.0);
        let interior = p.interior();
        for l in 0..8 {
            let x = b.vector(l);
            for (idx, v) in x.iter().enumerate() {
                if interior.binary_search(&idx).is_err() {
                    assert_eq!(*v, 0.0);
                }
            }
        }
        let g = b.gram(&prod);
        for i in 0..8 {
            for j in 0..8 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((g[(i, j)] - e).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn zero_potential_is_the_laplacian() {
        let (_, prod) = setup(10);
        let v = Potential::new(ProductFunction::zeros(10, 10), PotentialKind::Custom).unwrap();
        let h = hamiltonian_basis(&prod, &v, 5, &EigsOptions::default()).unwrap();
        let g = eigs_smallest(&prod, 5, &EigsOptions::default()).unwrap();
        for (a, b) in h.eigenvalues().iter().zip(g.eigenvalues()) {
            assert!((a - b).abs() < 1e-9 * b.max(1.0));
        }
    }

    #[test]
    fn separable_marginal_is_squared_factor() {
        let op = lump_mass(&assemble_1d(&circle(16)));
        let b = eigs_smallest(&op, 4, &EigsOptions::default()).unwrap();
        let (phi, psi) = (b.vector(2), b.vector(3));
        let f = ProductFunction::outer(&phi, &psi);
        let m = energy_marginal(&f, Side::M, &op.lumped_masses()).unwrap();
        for (a, p) in m.iter().zip(&phi) {
            assert!((a - p * p).abs() < 1e-12);
        }
    }

    #[test]
    fn potential_text_round_trip() {
        let (s, prod) = setup(8);
        let (p, _) = band_patch(&[(0, 0)], &s, &s, &prod, BandSize::Radius(1.0)).unwrap();
        let v = Potential::step(&p, 100.0).unwrap();
        let back = Potential::parse(&v.to_text(), "t").unwrap();
        assert_eq!(back, v);
        assert!(Potential::step(&p, 0.5).is_err());
        let text = p.to_text();
        assert_eq!(Patch::parse(&text, &prod, "t").unwrap(), p);
    }
}
