use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// Vertex-to-vertex map from `M` to `N`; vertices may be unmatched.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PointMap {
    targets: Vec<Option<usize>>,
    n_target: usize,
}

impl PointMap {
    pub fn new(targets: Vec<Option<usize>>, n_target: usize) -> Result<Self> {
        if let Some((i, t)) = targets
            .iter()
            .enumerate()
            .find_map(|(i, t)| t.filter(|&t| t >= n_target).map(|t| (i, t)))
        {
            return Err(Error::InvalidArgument(format!(
                "vertex {i} maps to {t}, outside the target range 0..{n_target}"
            )));
        }
        Ok(Self { targets, n_target })
    }

    /// A total map.
    pub fn from_targets(targets: Vec<usize>, n_target: usize) -> Result<Self> {
        Self::new(targets.into_iter().map(Some).collect(), n_target)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            targets: (0..n).map(Some).collect(),
            n_target: n,
        }
    }

    /// All vertices unmatched.
    pub fn unmatched(n_source: usize, n_target: usize) -> Self {
        Self {
            targets: vec![None; n_source],
            n_target,
        }
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn n_target(&self) -> usize {
        self.n_target
    }

    pub fn target(&self, i: usize) -> Option<usize> {
        self.targets[i]
    }

    pub fn targets(&self) -> &[Option<usize>] {
        &self.targets
    }

    pub fn set(&mut self, i: usize, t: Option<usize>) {
        assert!(t.is_none_or(|t| t < self.n_target));
        self.targets[i] = t;
    }

    /// Matched `(source, target)` pairs.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.targets.iter().enumerate().filter_map(|(i, t)| t.map(|t| (i, t)))
    }

    pub fn matched_count(&self) -> usize {
        self.targets.iter().filter(|t| t.is_some()).count()
    }

    pub fn is_total(&self) -> bool {
        self.targets.iter().all(Option::is_some)
    }

    pub fn is_injective(&self) -> bool {
        let mut seen = vec![false; self.n_target];
        for (_, t) in self.pairs() {
            if std::mem::replace(&mut seen[t], true) {
                return false;
            }
        }
        true
    }

    pub fn is_bijective(&self) -> bool {
        self.len() == self.n_target && self.is_total() && self.is_injective()
    }

    /// `other ∘ self`: first this map, then `other`.
    pub fn then(&self, other: &PointMap) -> Result<PointMap> {
        if other.len() != self.n_target {
            return Err(Error::dims("map composition", self.n_target, other.len()));
        }
        Ok(PointMap {
            targets: self.targets.iter().map(|t| t.and_then(|t| other.targets[t])).collect(),
            n_target: other.n_target,
        })
    }

    /// Inverse of an injective map.
    pub fn inverse(&self) -> Result<PointMap> {
        if !self.is_injective() {
            return Err(Error::InvalidArgument("map is not injective".into()));
        }
        let mut inv = vec![None; self.n_target];
        for (s, t) in self.pairs() {
            inv[t] = Some(s);
        }
        Ok(PointMap {
            targets: inv,
            n_target: self.len(),
        })
    }

    /// One target index per line, `-1` for unmatched vertices.
    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(8 * self.len());
        for t in &self.targets {
            match t {
                Some(t) => {
                    let _ = writeln!(s, "{t}");
                }
                None => s.push_str("-1\n"),
            }
        }
        s
    }

    pub fn parse(text: &str, n_target: usize, context: &str) -> Result<Self> {
        let mut targets = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let v: i64 = line
                .parse()
                .map_err(|_| Error::parse(context, ln + 1, format!("expected an integer, got `{line}`")))?;
            targets.push(match v {
                -1 => None,
                v if v >= 0 && (v as usize) < n_target => Some(v as usize),
                v => return Err(Error::parse(context, ln + 1, format!("target {v} outside 0..{n_target}"))),
            });
        }
        Ok(Self { targets, n_target })
    }

    pub fn load(path: impl AsRef<Path>, n_target: usize) -> Result<Self> {
        let path = path.as_ref();
        Self::parse(&crate::io::read_text(path)?, n_target, &path.display().to_string())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        crate::io::write_atomic(path, self.to_text().as_bytes())
    }
}
