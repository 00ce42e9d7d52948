//! On-disk reuse of eigenbases, keyed by a content hash of everything the
//! solve depends on.

use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::mesh::Shape;
use crate::spectral::{EigenBasis, EigsOptions};

/// Incremental SHA-256 key over length-prefixed parts.
#[derive(Clone, Default)]
pub struct CacheKey(Sha256);

impl CacheKey {
    pub fn new(kind: &str) -> Self {
        let mut k = Self(Sha256::new());
        k.push(kind.as_bytes());
        k
    }

    pub fn push(&mut self, bytes: &[u8]) -> &mut Self {
        self.0.update((bytes.len() as u64).to_le_bytes());
        self.0.update(bytes);
        self
    }

    pub fn push_str(&mut self, s: &str) -> &mut Self {
        self.push(s.as_bytes())
    }

    /// Mesh geometry and connectivity in their text serialization.
    pub fn push_shape(&mut self, shape: &Shape) -> &mut Self {
        match shape {
            Shape::Curve(c) => self.push_str("curve").push_str(&c.to_polyline()),
            Shape::Tri(t) => self.push_str("tri").push_str(&t.to_off()),
        }
    }

    /// `k`, tolerance, seed and the solver knobs that can change the result.
    pub fn push_solve(&mut self, k: usize, opts: &EigsOptions) -> &mut Self {
        let s = format!(
            "k={k} tol={:e} seed={} cycles={} subspace={:?} dense={}",
            opts.tol, opts.seed, opts.max_cycles, opts.subspace, opts.dense_threshold
        );
        self.push_str(&s)
    }

    pub fn hex(&self) -> String {
        self.0.clone().finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// A directory of `<hash>.eig` files with their manifests.
#[derive(Debug, Clone)]
pub struct EigsCache {
    dir: PathBuf,
}

impl EigsCache {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(Self { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_of(&self, key: &CacheKey) -> PathBuf {
        self.dir.join(format!("{}.eig", key.hex()))
    }

    /// Loads the basis for `key`, or computes and stores it. The flag is true on a hit.
    pub fn get_or_compute(
        &self,
        key: &CacheKey,
        compute: impl FnOnce() -> Result<EigenBasis>,
    ) -> Result<(EigenBasis, bool)> {
        let path = self.path_of(key);
        if path.exists() {
            match EigenBasis::load(&path) {
                Ok(b) => {
                    log::info!("eigenbasis cache hit {}", path.display());
                    return Ok((b, true));
                }
                Err(e) => log::warn!("ignoring unreadable cache entry {}: {e}", path.display()),
            }
        }
        let b = compute()?;
        b.save(&path, &[("cache_key".into(), key.hex())])?;
        Ok((b, false))
    }
}

/// Runs `compute` through the cache when one is given.
pub fn cached(
    cache: Option<&EigsCache>,
    key: impl FnOnce() -> CacheKey,
    compute: impl FnOnce() -> Result<EigenBasis>,
) -> Result<EigenBasis> {
    match cache {
        Some(c) => Ok(c.get_or_compute(&key(), compute)?.0),
        None => compute(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::circle;
    use crate::spectral::eigs_smallest;

    #[test]
    fn keys_separate_inputs() {
        let a = Shape::Curve(circle(16, 1.0).unwrap());
        let b = Shape::Curve(circle(16, 2.0).unwrap());
        let o = EigsOptions::default();
        let ka = CacheKey::new("eigs").push_shape(&a).push_solve(4, &o).hex();
        assert_eq!(ka, CacheKey::new("eigs").push_shape(&a).push_solve(4, &o).hex());
        assert_ne!(ka, CacheKey::new("eigs").push_shape(&b).push_solve(4, &o).hex());
        assert_ne!(ka, CacheKey::new("eigs").push_shape(&a).push_solve(5, &o).hex());
        let o2 = EigsOptions { seed: 3, ..o };
        assert_ne!(ka, CacheKey::new("eigs").push_shape(&a).push_solve(4, &o2).hex());
    }

    #[test]
    fn hit_returns_stored_basis() {
        let dir = tempfile::tempdir().unwrap();
        let cache = EigsCache::open(dir.path()).unwrap();
        let s = Shape::Curve(circle(24, 1.0).unwrap());
        let op = s.assemble();
        let o = EigsOptions::default();
        let key = {
            let mut k = CacheKey::new("eigs");
            k.push_shape(&s).push_solve(5, &o);
            k
        };
        let (b1, hit1) = cache.get_or_compute(&key, || eigs_smallest(&op, 5, &o)).unwrap();
        let (b2, hit2) = cache.get_or_compute(&key, || panic!("should not recompute")).unwrap();
        assert!(!hit1 && hit2);
        assert_eq!(b1.eigenvalues(), b2.eigenvalues());
        assert_eq!(b1.residual_norms(), b2.residual_norms());
    }
}
