use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use faer::{Mat, MatRef};

use crate::error::{Error, Result};

use super::pencil::{apply_mass_vec, SymmetricPencil};

/// Where a basis came from; downstream operations check this.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Provenance {
    GlobalFactor,
    ProductSeparable,
    PatchDirichlet,
    Hamiltonian,
}

impl Provenance {
    pub fn tag(self) -> u8 {
        match self {
            Provenance::GlobalFactor => 0,
            Provenance::ProductSeparable => 1,
            Provenance::PatchDirichlet => 2,
            Provenance::Hamiltonian => 3,
        }
    }

    pub fn from_tag(t: u8) -> Option<Self> {
        Some(match t {
            0 => Provenance::GlobalFactor,
            1 => Provenance::ProductSeparable,
            2 => Provenance::PatchDirichlet,
            3 => Provenance::Hamiltonian,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Provenance::GlobalFactor => "global-factor",
            Provenance::ProductSeparable => "product-separable",
            Provenance::PatchDirichlet => "patch-dirichlet",
            Provenance::Hamiltonian => "hamiltonian",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            Provenance::GlobalFactor,
            Provenance::ProductSeparable,
            Provenance::PatchDirichlet,
            Provenance::Hamiltonian,
        ]
        .into_iter()
        .find(|p| p.name() == s)
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `k` generalized eigenpairs, S-orthonormal, eigenvalues nondecreasing.
///
/// Vectors may be stored on a subset of the vertices (`support`); they are
/// zero everywhere else. Patch bases use this to avoid storing the full grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenBasis {
    eigenvalues: Vec<f64>,
    vectors: Mat<f64>,
    support: Option<Vec<usize>>,
    dim: usize,
    provenance: Provenance,
    residual_norms: Vec<f64>,
    tolerance: f64,
}

const MAGIC: &[u8; 8] = b"PMEBASIS";

impl EigenBasis {
    pub fn new(
        eigenvalues: Vec<f64>,
        vectors: Mat<f64>,
        provenance: Provenance,
        residual_norms: Vec<f64>,
        tolerance: f64,
    ) -> Result<Self> {
        let dim = vectors.nrows();
        Self::with_support(eigenvalues, vectors, None, dim, provenance, residual_norms, tolerance)
    }

    pub fn with_support(
        eigenvalues: Vec<f64>,
        vectors: Mat<f64>,
        support: Option<Vec<usize>>,
        dim: usize,
        provenance: Provenance,
        residual_norms: Vec<f64>,
        tolerance: f64,
    ) -> Result<Self> {
        let k = eigenvalues.len();
        if vectors.ncols() != k {
            return Err(Error::dims("eigenvector count", k, vectors.ncols()));
        }
        if residual_norms.len() != k {
            return Err(Error::dims("residual count", k, residual_norms.len()));
        }
        match &support {
            Some(s) => {
                if s.len() != vectors.nrows() {
                    return Err(Error::dims("support size", vectors.nrows(), s.len()));
                }
                if s.windows(2).any(|w| w[0] >= w[1]) || s.last().is_some_and(|&l| l >= dim) {
                    return Err(Error::InvalidArgument(
                        "support must be strictly increasing and within the dimension".into(),
                    ));
                }
            }
            None => {
                if vectors.nrows() != dim {
                    return Err(Error::dims("eigenvector length", dim, vectors.nrows()));
                }
            }
        }
        Ok(Self {
            eigenvalues,
            vectors,
            support,
            dim,
            provenance,
            residual_norms,
            tolerance,
        })
    }

    /// An empty basis of the given dimension.
    pub fn empty(dim: usize, provenance: Provenance) -> Self {
        Self {
            eigenvalues: Vec::new(),
            vectors: Mat::zeros(dim, 0),
            support: None,
            dim,
            provenance,
            residual_norms: Vec::new(),
            tolerance: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn residual_norms(&self) -> &[f64] {
        &self.residual_norms
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// Vectors restricted to the support (rows follow [`EigenBasis::support`]).
    pub fn stored_vectors(&self) -> MatRef<'_, f64> {
        self.vectors.as_ref()
    }

    pub fn support(&self) -> Option<&[usize]> {
        self.support.as_deref()
    }

    /// The first `k` pairs.
    pub fn truncated(&self, k: usize) -> Self {
        let k = k.min(self.len());
        Self {
            eigenvalues: self.eigenvalues[..k].to_vec(),
            vectors: self.vectors.subcols(0, k).to_owned(),
            support: self.support.clone(),
            dim: self.dim,
            provenance: self.provenance,
            residual_norms: self.residual_norms[..k].to_vec(),
            tolerance: self.tolerance,
        }
    }

    /// Column `l` extended by zero to the full dimension.
    pub fn vector(&self, l: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        let col = self.vectors.col(l);
        match &self.support {
            Some(s) => {
                for (r, &g) in s.iter().enumerate() {
                    out[g] = col[r];
                }
            }
            None => {
                for (r, o) in out.iter_mut().enumerate() {
                    *o = col[r];
                }
            }
        }
        out
    }

    /// All vectors as a dense `dim x k` block.
    pub fn full_vectors(&self) -> Mat<f64> {
        match &self.support {
            None => self.vectors.clone(),
            Some(s) => {
                let mut m = Mat::zeros(self.dim, self.len());
                for l in 0..self.len() {
                    for (r, &g) in s.iter().enumerate() {
                        m[(g, l)] = self.vectors[(r, l)];
                    }
                }
                m
            }
        }
    }

    fn restrict(&self, f: &[f64]) -> Vec<f64> {
        match &self.support {
            Some(s) => s.iter().map(|&g| f[g]).collect(),
            None => f.to_vec(),
        }
    }

    /// Projection coefficients `c_l = ⟨x_l, f⟩ = x_lᵀ S f`.
    pub fn expand<P: SymmetricPencil + ?Sized>(&self, pencil: &P, f: &[f64]) -> Result<Vec<f64>> {
        if f.len() != self.dim {
            return Err(Error::dims("function length", self.dim, f.len()));
        }
        if pencil.dim() != self.dim {
            return Err(Error::dims("mass operator", self.dim, pencil.dim()));
        }
        let sf = apply_mass_vec(pencil, f);
        Ok(self.coefficients_of_mass_weighted(&sf))
    }

    /// `Xᵀ g` for an already mass-weighted vector `g = S f`.
    pub fn coefficients_of_mass_weighted(&self, sf: &[f64]) -> Vec<f64> {
        let r = self.restrict(sf);
        (0..self.len())
            .map(|l| {
                let col = self.vectors.col(l);
                r.iter().enumerate().map(|(i, &v)| col[i] * v).sum()
            })
            .collect()
    }

    /// `Σ_l c_l x_l`, zero-extended to the full dimension.
    pub fn synthesize(&self, c: &[f64]) -> Result<Vec<f64>> {
        if c.len() != self.len() {
            return Err(Error::dims("coefficient count", self.len(), c.len()));
        }
        let mut stored = vec![0.0; self.vectors.nrows()];
        for (l, &cl) in c.iter().enumerate() {
            if cl == 0.0 {
                continue;
            }
            let col = self.vectors.col(l);
            for (i, s) in stored.iter_mut().enumerate() {
                *s += cl * col[i];
            }
        }
        Ok(match &self.support {
            None => stored,
            Some(s) => {
                let mut out = vec![0.0; self.dim];
                for (r, &g) in s.iter().enumerate() {
                    out[g] = stored[r];
                }
                out
            }
        })
    }

    /// `XᵀSX`, for orthonormality checks.
    pub fn gram<P: SymmetricPencil + ?Sized>(&self, pencil: &P) -> Mat<f64> {
        let x = self.full_vectors();
        let sx = pencil.apply_mass(x.as_ref());
        x.transpose() * &sx
    }

    /// Binary container: magic, then little-endian `n: u64`, `k: u64`,
    /// provenance tag `u8`, tolerance `f64`, `k` eigenvalues, and the
    /// zero-extended vectors column-major, all as `f64`.
    pub fn write_binary<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&(self.dim as u64).to_le_bytes())?;
        w.write_all(&(self.len() as u64).to_le_bytes())?;
        w.write_all(&[self.provenance.tag()])?;
        w.write_all(&self.tolerance.to_le_bytes())?;
        for v in &self.eigenvalues {
            w.write_all(&v.to_le_bytes())?;
        }
        let mut buf = Vec::with_capacity(8 * self.dim);
        for l in 0..self.len() {
            buf.clear();
            for v in self.vector(l) {
                buf.extend_from_slice(&v.to_le_bytes());
            }
            w.write_all(&buf)?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let bad = |m: &str| Error::parse("eigenbasis", 0, m.to_string());
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic).map_err(|_| bad("truncated header"))?;
        if &magic != MAGIC {
            return Err(bad("not an eigenbasis file"));
        }
        let mut u = [0u8; 8];
        r.read_exact(&mut u).map_err(|_| bad("truncated header"))?;
        let n = u64::from_le_bytes(u) as usize;
        r.read_exact(&mut u).map_err(|_| bad("truncated header"))?;
        let k = u64::from_le_bytes(u) as usize;
        let mut t = [0u8; 1];
        r.read_exact(&mut t).map_err(|_| bad("truncated header"))?;
        let provenance = Provenance::from_tag(t[0]).ok_or_else(|| bad("unknown provenance tag"))?;
        r.read_exact(&mut u).map_err(|_| bad("truncated header"))?;
        let tolerance = f64::from_le_bytes(u);
        let mut read_f64 = |r: &mut R| -> Result<f64> {
            r.read_exact(&mut u).map_err(|_| bad("truncated data"))?;
            Ok(f64::from_le_bytes(u))
        };
        let eigenvalues = (0..k).map(|_| read_f64(&mut r)).collect::<Result<Vec<_>>>()?;
        let mut vectors = Mat::zeros(n, k);
        for l in 0..k {
            for i in 0..n {
                vectors[(i, l)] = read_f64(&mut r)?;
            }
        }
        Self::new(eigenvalues, vectors, provenance, vec![0.0; k], tolerance)
    }

    /// Human-readable companion of the binary file.
    pub fn manifest(&self, extra: &[(String, String)]) -> String {
        let mut s = String::new();
        s.push_str(&format!("n = {}\n", self.dim));
        s.push_str(&format!("k = {}\n", self.len()));
        s.push_str(&format!("provenance = {}\n", self.provenance));
        s.push_str(&format!("tolerance = {}\n", self.tolerance));
        let ev: Vec<String> = self.eigenvalues.iter().map(|v| v.to_string()).collect();
        s.push_str(&format!("eigenvalues = {}\n", ev.join(" ")));
        let rn: Vec<String> = self.residual_norms.iter().map(|v| v.to_string()).collect();
        s.push_str(&format!("residual_norms = {}\n", rn.join(" ")));
        if let Some(sup) = &self.support {
            s.push_str(&format!("support_size = {}\n", sup.len()));
        }
        for (k, v) in extra {
            s.push_str(&format!("{k} = {v}\n"));
        }
        s
    }

    pub fn save(&self, path: impl AsRef<Path>, extra: &[(String, String)]) -> Result<()> {
        let path = path.as_ref();
        let mut bytes = Vec::new();
        self.write_binary(&mut bytes).map_err(|e| Error::io(path, e))?;
        crate::io::write_atomic(path, &bytes)?;
        crate::io::write_atomic(manifest_path(path), self.manifest(extra).as_bytes())
    }

    /// Loads the binary container and, if present, residuals from its manifest.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut b = Self::read_binary(std::io::BufReader::new(f))?;
        if let Ok(text) = std::fs::read_to_string(manifest_path(path)) {
            for line in text.lines() {
                if let Some(v) = line.strip_prefix("residual_norms = ") {
                    let r: Vec<f64> = v.split_whitespace().filter_map(|t| t.parse().ok()).collect();
                    if r.len() == b.len() {
                        b.residual_norms = r;
                    }
                }
            }
        }
        Ok(b)
    }
}

pub fn manifest_path(path: &Path) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".manifest");
    s.into()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> EigenBasis {
        let v = Mat::from_fn(4, 2, |i, j| (i * 2 + j) as f64 * 0.25 - 0.5);
        EigenBasis::with_support(
            vec![0.0, 1.5],
            v,
            Some(vec![0, 2, 3, 6]),
            8,
            Provenance::PatchDirichlet,
            vec![1e-12, 2e-12],
            1e-8,
        )
        .unwrap()
    }

    #[test]
    fn zero_extension() {
        let b = toy();
        let x = b.vector(1);
        assert_eq!(x.len(), 8);
        assert_eq!(x[1], 0.0);
        assert_eq!(x[6], b.stored_vectors()[(3, 1)]);
    }

    #[test]
    fn binary_round_trip() {
        let b = toy();
        let mut bytes = Vec::new();
        b.write_binary(&mut bytes).unwrap();
        assert_eq!(bytes.len(), 8 + 8 + 8 + 1 + 8 + 2 * 8 + 2 * 8 * 8);
        let back = EigenBasis::read_binary(&bytes[..]).unwrap();
        assert_eq!(back.eigenvalues(), b.eigenvalues());
        assert_eq!(back.full_vectors(), b.full_vectors());
        assert_eq!(back.provenance(), Provenance::PatchDirichlet);
    }

    #[test]
    fn rejects_bad_support() {
        let v = Mat::<f64>::zeros(2, 1);
        let r = EigenBasis::with_support(vec![1.0], v, Some(vec![3, 1]), 5, Provenance::Hamiltonian, vec![0.0], 1e-8);
        assert!(r.is_err());
    }

    #[test]
    fn provenance_names_round_trip() {
        for t in 0..4 {
            let p = Provenance::from_tag(t).unwrap();
            assert_eq!(Provenance::parse(p.name()), Some(p));
        }
    }
}
