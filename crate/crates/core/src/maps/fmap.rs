use std::fmt::Write as _;
use std::path::Path;

use faer::Mat;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::mesh::OperatorPair;
use crate::sparse;
use crate::spectral::dense::atb;
use crate::spectral::EigenBasis;

use super::MapDensity;

/// How a coefficient matrix is truncated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Truncation {
    /// All pairs `i < k_M`, `j < k_N`.
    Rectangular,
    /// The first `k` pairs ordered by `α_i + β_j`.
    ProductOrdered,
}

impl Truncation {
    pub fn name(self) -> &'static str {
        match self {
            Truncation::Rectangular => "rect",
            Truncation::ProductOrdered => "product-ordered",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "rect" | "rectangular" => Some(Truncation::Rectangular),
            "product-ordered" => Some(Truncation::ProductOrdered),
            _ => None,
        }
    }
}

/// Hex SHA-256 of a basis' binary serialization.
pub fn basis_hash(b: &EigenBasis) -> String {
    let mut bytes = Vec::new();
    b.write_binary(&mut bytes).expect("writing to memory");
    Sha256::digest(&bytes).iter().fold(String::with_capacity(64), |mut s, x| {
        let _ = write!(s, "{x:02x}");
        s
    })
}

/// Coefficients `c_ij = ⟨φ_i, T(ψ_j)⟩_M` of a map in two factor bases.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalMapMatrix {
    c: Mat<f64>,
    truncation: Truncation,
    pairs: Option<Vec<(usize, usize)>>,
    basis_m_hash: String,
    basis_n_hash: String,
}

impl FunctionalMapMatrix {
    pub fn new(c: Mat<f64>, basis_m_hash: String, basis_n_hash: String) -> Self {
        Self {
            c,
            truncation: Truncation::Rectangular,
            pairs: None,
            basis_m_hash,
            basis_n_hash,
        }
    }

    pub fn matrix(&self) -> &Mat<f64> {
        &self.c
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.c.nrows(), self.c.ncols())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.c[(i, j)]
    }

    pub fn truncation(&self) -> Truncation {
        self.truncation
    }

    /// Index set of a product-ordered truncation.
    pub fn pairs(&self) -> Option<&[(usize, usize)]> {
        self.pairs.as_deref()
    }

    pub fn basis_hashes(&self) -> (&str, &str) {
        (&self.basis_m_hash, &self.basis_n_hash)
    }

    /// Keeps only the listed coefficients (an irregular finite section).
    pub fn restricted_to(&self, pairs: &[(usize, usize)]) -> Result<Self> {
        let (km, kn) = self.dims();
        let mut c = Mat::zeros(km, kn);
        for &(i, j) in pairs {
            if i >= km || j >= kn {
                return Err(Error::InvalidArgument(format!("pair ({i}, {j}) outside the {km}x{kn} matrix")));
            }
            c[(i, j)] = self.c[(i, j)];
        }
        Ok(Self {
            c,
            truncation: Truncation::ProductOrdered,
            pairs: Some(pairs.to_vec()),
            basis_m_hash: self.basis_m_hash.clone(),
            basis_n_hash: self.basis_n_hash.clone(),
        })
    }

    /// Header `kM kN`, comment lines with the truncation and basis hashes,
    /// then the matrix row by row.
    pub fn to_text(&self) -> String {
        let (km, kn) = self.dims();
        let mut s = String::new();
        let _ = writeln!(s, "{km} {kn}");
        let _ = writeln!(s, "# truncation {}", self.truncation.name());
        let _ = writeln!(s, "# basis_m {}", self.basis_m_hash);
        let _ = writeln!(s, "# basis_n {}", self.basis_n_hash);
        if let Some(p) = &self.pairs {
            let list: Vec<String> = p.iter().map(|(i, j)| format!("{i},{j}")).collect();
            let _ = writeln!(s, "# pairs {}", list.join(" "));
        }
        for i in 0..km {
            let row: Vec<String> = (0..kn).map(|j| format!("{:e}", self.c[(i, j)])).collect();
            let _ = writeln!(s, "{}", row.join(" "));
        }
        s
    }

    pub fn parse(text: &str, context: &str) -> Result<Self> {
        let mut dims = None;
        let mut truncation = Truncation::Rectangular;
        let (mut hm, mut hn) = (String::new(), String::new());
        let mut pairs = None;
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (ln, line) in text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())) {
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let mut it = rest.split_whitespace();
                match (it.next(), it.next()) {
                    (Some("truncation"), Some(t)) => {
                        truncation = Truncation::parse(t).ok_or_else(|| Error::parse(context, ln, "unknown truncation"))?
                    }
                    (Some("basis_m"), Some(h)) => hm = h.to_string(),
                    (Some("basis_n"), Some(h)) => hn = h.to_string(),
                    (Some("pairs"), first) => {
                        let mut v = Vec::new();
                        for tok in first.into_iter().chain(it) {
                            let (a, b) = tok.split_once(',').ok_or_else(|| Error::parse(context, ln, "bad pair"))?;
                            let a = a.parse().map_err(|_| Error::parse(context, ln, "bad pair"))?;
                            let b = b.parse().map_err(|_| Error::parse(context, ln, "bad pair"))?;
                            v.push((a, b));
                        }
                        pairs = Some(v);
                    }
                    _ => {}
                }
                continue;
            }
            let vals: Vec<&str> = line.split_whitespace().collect();
            if dims.is_none() {
                if vals.len() != 2 {
                    return Err(Error::parse(context, ln, "header must be `kM kN`"));
                }
                let a: usize = vals[0].parse().map_err(|_| Error::parse(context, ln, "bad header"))?;
                let b: usize = vals[1].parse().map_err(|_| Error::parse(context, ln, "bad header"))?;
                dims = Some((a, b));
                continue;
            }
            let row = vals
                .iter()
                .map(|t| t.parse::<f64>().map_err(|_| Error::parse(context, ln, "bad value")))
                .collect::<Result<Vec<_>>>()?;
            if row.len() != dims.unwrap().1 {
                return Err(Error::parse(context, ln, "row length does not match the header"));
            }
            rows.push(row);
        }
        let (km, kn) = dims.ok_or_else(|| Error::parse(context, 0, "missing header"))?;
        if rows.len() != km {
            return Err(Error::parse(context, 0, format!("expected {km} rows, found {}", rows.len())));
        }
        Ok(Self {
            c: Mat::from_fn(km, kn, |i, j| rows[i][j]),
            truncation,
            pairs,
            basis_m_hash: hm,
            basis_n_hash: hn,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::parse(&crate::io::read_text(path)?, &path.display().to_string())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        crate::io::write_atomic(path, self.to_text().as_bytes())
    }
}

/// `C = Φᵀ S_M M_μ S_N Ψ`.
///
/// Entry `c_ij` equals the coefficient of `μ` on the product function
/// `φ_i ψ_jᵀ` under the product mass `S_M ⊗ S_N` built from the same factors.
pub fn fmap_from_density(
    mu: &MapDensity,
    basis_m: &EigenBasis,
    basis_n: &EigenBasis,
    op_m: &OperatorPair,
    op_n: &OperatorPair,
) -> Result<FunctionalMapMatrix> {
    let (nm, nn) = mu.grid();
    if basis_m.dim() != nm || op_m.n() != nm {
        return Err(Error::dims("source basis", nm, basis_m.dim()));
    }
    if basis_n.dim() != nn || op_n.n() != nn {
        return Err(Error::dims("target basis", nn, basis_n.dim()));
    }
    let a = sparse::mul(op_m.mass(), basis_m.full_vectors().as_ref());
    let b = sparse::mul(op_n.mass(), basis_n.full_vectors().as_ref());
    let mb = sparse::mul(&mu.to_sparse(), b.as_ref());
    let c = atb(a.as_ref(), mb.as_ref());
    Ok(FunctionalMapMatrix::new(c, basis_hash(basis_m), basis_hash(basis_n)))
}
