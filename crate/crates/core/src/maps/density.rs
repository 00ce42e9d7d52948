use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::product::ProductFunction;
use crate::sparse::{self, SparseMat};

use super::PointMap;

/// Sparse nonnegative density `μ(x, y)` on the `n_M × n_N` grid.
///
/// Values are densities per unit target measure: the mass-weighted row sum
/// `Σ_y μ(x, y) ŝ_N(y)` is the total probability sent from `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct MapDensity {
    n_m: usize,
    n_n: usize,
    /// Sorted by `(x, y)`, no duplicates.
    entries: Vec<(usize, usize, f64)>,
    stochastic: bool,
}

impl MapDensity {
    /// Duplicate entries are summed; explicit zeros are kept.
    pub fn new(n_m: usize, n_n: usize, mut entries: Vec<(usize, usize, f64)>) -> Result<Self> {
        for &(x, y, v) in &entries {
            if x >= n_m || y >= n_n {
                return Err(Error::InvalidArgument(format!(
                    "density entry ({x}, {y}) outside the {n_m}x{n_n} grid"
                )));
            }
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidArgument(format!("density entry ({x}, {y}) = {v} is not a finite nonnegative value")));
            }
        }
        entries.sort_by_key(|e| (e.0, e.1));
        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(entries.len());
        for e in entries {
            match merged.last_mut() {
                Some(l) if (l.0, l.1) == (e.0, e.1) => l.2 += e.2,
                _ => merged.push(e),
            }
        }
        Ok(Self {
            n_m,
            n_n,
            entries: merged,
            stochastic: false,
        })
    }

    pub fn empty(n_m: usize, n_n: usize) -> Self {
        Self {
            n_m,
            n_n,
            entries: Vec::new(),
            stochastic: true,
        }
    }

    pub fn grid(&self) -> (usize, usize) {
        (self.n_m, self.n_n)
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_stochastic(&self) -> bool {
        self.stochastic
    }

    /// Declares the mass-weighted rows to sum to one; checked against `mass_n`.
    pub fn mark_stochastic(mut self, mass_n: &[f64]) -> Result<Self> {
        for (x, m) in self.row_marginals(mass_n)?.into_iter().enumerate() {
            if let Some(m) = m {
                if (m - 1.0).abs() > 1e-9 {
                    return Err(Error::InvalidArgument(format!("row {x} has marginal {m}, not 1")));
                }
            }
        }
        self.stochastic = true;
        Ok(self)
    }

    /// Divides each nonempty row by its marginal.
    pub fn normalize_rows(&self, mass_n: &[f64]) -> Result<Self> {
        let marg = self.row_marginals(mass_n)?;
        let entries = self
            .entries
            .iter()
            .map(|&(x, y, v)| match marg[x] {
                Some(m) if m > 0.0 => (x, y, v / m),
                _ => (x, y, v),
            })
            .collect();
        Ok(Self {
            n_m: self.n_m,
            n_n: self.n_n,
            entries,
            stochastic: marg.iter().all(|m| m.is_none_or(|m| m > 0.0)),
        })
    }

    /// `Σ_y μ(x, y) m(y)` for rows with entries, `None` for empty rows.
    pub fn row_marginals(&self, mass_n: &[f64]) -> Result<Vec<Option<f64>>> {
        if mass_n.len() != self.n_n {
            return Err(Error::dims("target masses", self.n_n, mass_n.len()));
        }
        let mut out = vec![None; self.n_m];
        for &(x, y, v) in &self.entries {
            *out[x].get_or_insert(0.0) += v * mass_n[y];
        }
        Ok(out)
    }

    /// Sparse `n_M × n_N` matrix of the density values.
    pub fn to_sparse(&self) -> SparseMat {
        let t: Vec<_> = self
            .entries
            .iter()
            .map(|&(x, y, v)| faer::sparse::Triplet::new(x, y, v))
            .collect();
        sparse::from_triplets(self.n_m, self.n_n, &t)
    }

    pub fn to_function(&self) -> ProductFunction {
        let mut f = ProductFunction::zeros(self.n_m, self.n_n);
        for &(x, y, v) in &self.entries {
            f.set(x, y, v);
        }
        f
    }

    /// Keeps the entries of a grid function that are strictly positive.
    pub fn from_function(f: &ProductFunction) -> Self {
        let (m, n) = f.dims();
        let mut entries = Vec::new();
        for x in 0..m {
            for y in 0..n {
                let v = f.get(x, y);
                if v > 0.0 {
                    entries.push((x, y, v));
                }
            }
        }
        Self {
            n_m: m,
            n_n: n,
            entries,
            stochastic: false,
        }
    }

    /// Grid vertices carrying an entry, as `(x, y)`.
    pub fn support(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.entries.iter().map(|e| (e.0, e.1))
    }

    /// Header `nM nN nnz`, then `i j value` per line.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} {} {}", self.n_m, self.n_n, self.entries.len());
        for &(x, y, v) in &self.entries {
            let _ = writeln!(s, "{x} {y} {v:e}");
        }
        s
    }

    pub fn parse(text: &str, context: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (ln, header) = lines.next().ok_or_else(|| Error::parse(context, 0, "empty file"))?;
        let h: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| Error::parse(context, ln, "header must be `nM nN nnz`")))
            .collect::<Result<_>>()?;
        if h.len() != 3 {
            return Err(Error::parse(context, ln, "header must be `nM nN nnz`"));
        }
        let mut entries = Vec::with_capacity(h[2]);
        for (ln, line) in lines {
            let t: Vec<&str> = line.split_whitespace().collect();
            if t.len() != 3 {
                return Err(Error::parse(context, ln, "expected `i j value`"));
            }
            let x = t[0].parse().map_err(|_| Error::parse(context, ln, "bad row index"))?;
            let y = t[1].parse().map_err(|_| Error::parse(context, ln, "bad column index"))?;
            let v = t[2].parse().map_err(|_| Error::parse(context, ln, "bad value"))?;
            entries.push((x, y, v));
        }
        if entries.len() != h[2] {
            return Err(Error::parse(context, 0, format!("header announces {} entries, found {}", h[2], entries.len())));
        }
        Self::new(h[0], h[1], entries).map_err(|e| Error::parse(context, 0, e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::parse(&crate::io::read_text(path)?, &path.display().to_string())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        crate::io::write_atomic(path, self.to_text().as_bytes())
    }
}

/// `μ(x, π(x)) = 1 / ŝ_N(π(x))`: a unit Dirac mass per mapped vertex.
pub fn density_from_pointmap(pm: &PointMap, mass_n: &[f64]) -> Result<MapDensity> {
    if mass_n.len() != pm.n_target() {
        return Err(Error::dims("target masses", pm.n_target(), mass_n.len()));
    }
    let entries = pm.pairs().map(|(x, y)| (x, y, 1.0 / mass_n[y])).collect();
    let mut d = MapDensity::new(pm.len(), pm.n_target(), entries)?;
    d.stochastic = true;
    Ok(d)
}

/// `T_μ(g)(x) = Σ_y μ(x, y) (S g)(y)` with the given target mass operator.
///
/// With the lumped target mass this is the quadrature `Σ_y μ(x,y) g(y) ŝ(y)`.
pub fn soft_functional_apply(mu: &MapDensity, g: &[f64], mass_n: &SparseMat) -> Result<Vec<f64>> {
    let (m, n) = mu.grid();
    if g.len() != n {
        return Err(Error::dims("target function", n, g.len()));
    }
    if mass_n.nrows() != n {
        return Err(Error::dims("target mass", n, mass_n.nrows()));
    }
    let sg = sparse::mul_vec(mass_n, g);
    let mut out = vec![0.0; m];
    for &(x, y, v) in mu.entries() {
        out[x] += v * sg[y];
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dirac_density_marginals() {
        let pm = PointMap::new(vec![Some(1), None, Some(1), Some(0)], 2).unwrap();
        let mass = [0.5, 0.25];
        let d = density_from_pointmap(&pm, &mass).unwrap();
        assert!(d.is_stochastic());
        let m = d.row_marginals(&mass).unwrap();
        assert_eq!(m, vec![Some(1.0), None, Some(1.0), Some(1.0)]);
        assert_eq!(d.entries()[0], (0, 1, 4.0));
    }

    #[test]
    fn text_round_trip() {
        let d = MapDensity::new(3, 4, vec![(2, 1, 0.5), (0, 3, 1.25), (2, 1, 0.5)]).unwrap();
        assert_eq!(d.nnz(), 2);
        let back = MapDensity::parse(&d.to_text(), "t").unwrap();
        assert_eq!(back.entries(), d.entries());
    }

    #[test]
    fn negative_values_rejected() {
        assert!(MapDensity::new(2, 2, vec![(0, 0, -1e-3)]).is_err());
        assert!(MapDensity::new(2, 2, vec![(0, 2, 1.0)]).is_err());
    }
}
