//! Text formats for sparse matrices and atomic file output.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::sparse::{self, SparseMat};

/// Writes `bytes` to a temporary file next to `path`, then renames it over `path`.
pub fn write_atomic(path: impl AsRef<Path>, bytes: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let name = path
        .file_name()
        .ok_or_else(|| Error::InvalidArgument(format!("not a file path: {}", path.display())))?
        .to_string_lossy();
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    let res = (|| {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)
    })();
    if let Err(e) = res {
        let _ = std::fs::remove_file(&tmp);
        return Err(Error::io(path, e));
    }
    Ok(())
}

pub fn read_text(path: impl AsRef<Path>) -> Result<String> {
    let path = path.as_ref();
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Square sparse matrix as text: header `n nnz`, then `i j value` per line, 0-based.
pub fn triplets_to_string(a: &SparseMat) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{} {}", a.nrows(), sparse::nnz(a));
    for (r, c, v) in sparse::entries(a.as_ref()) {
        let _ = writeln!(s, "{r} {c} {v:e}");
    }
    s
}

pub fn parse_triplets(text: &str, context: &str) -> Result<SparseMat> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (ln, header) = lines.next().ok_or_else(|| Error::parse(context, 0, "empty file"))?;
    let h: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| Error::parse(context, ln, "header must be `n nnz`")))
        .collect::<Result<_>>()?;
    if h.len() != 2 {
        return Err(Error::parse(context, ln, "header must be `n nnz`"));
    }
    let (n, nnz) = (h[0], h[1]);
    let mut entries = Vec::with_capacity(nnz);
    for (ln, line) in lines {
        let t: Vec<&str> = line.split_whitespace().collect();
        if t.len() != 3 {
            return Err(Error::parse(context, ln, "expected `i j value`"));
        }
        let i: usize = t[0].parse().map_err(|_| Error::parse(context, ln, "bad row index"))?;
        let j: usize = t[1].parse().map_err(|_| Error::parse(context, ln, "bad column index"))?;
        let v: f64 = t[2].parse().map_err(|_| Error::parse(context, ln, "bad value"))?;
        entries.push((i, j, v));
    }
    if entries.len() != nnz {
        return Err(Error::parse(
            context,
            0,
            format!("header announces {nnz} entries, found {}", entries.len()),
        ));
    }
    sparse::from_entries(n, n, &entries)
}

pub fn save_triplets(path: impl AsRef<Path>, a: &SparseMat) -> Result<()> {
    write_atomic(path, triplets_to_string(a).as_bytes())
}

pub fn load_triplets(path: impl AsRef<Path>) -> Result<SparseMat> {
    let path = path.as_ref();
    parse_triplets(&read_text(path)?, &path.display().to_string())
}
