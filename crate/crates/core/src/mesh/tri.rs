use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use crate::error::{Error, Result};

/// Faces whose area is below this fraction of the mean face area are rejected.
pub const DEGENERATE_AREA_RATIO: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Off,
    Obj,
}

impl MeshFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "off" => Some(MeshFormat::Off),
            "obj" => Some(MeshFormat::Obj),
            _ => None,
        }
    }
}

/// An undirected mesh edge `a < b` with the (one or two) faces that border it.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub faces: Vec<usize>,
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.faces.len() == 1
    }
}

/// A manifold triangle mesh with edges classified as interior (two incident
/// faces) or boundary (one incident face).
#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    vertices: Vec<[f64; 3]>,
    faces: Vec<[usize; 3]>,
    edges: Vec<Edge>,
    areas: Vec<f64>,
}

impl TriMesh {
    pub fn new(vertices: Vec<[f64; 3]>, faces: Vec<[usize; 3]>) -> Result<Self> {
        let n = vertices.len();
        if faces.is_empty() {
            return Err(Error::InvalidMesh("mesh has no faces".into()));
        }
        let mut seen = BTreeSet::new();
        for (fi, f) in faces.iter().enumerate() {
            for &v in f {
                if v >= n {
                    return Err(Error::InvalidMesh(format!(
                        "face {fi} references vertex {v}, but the mesh has {n} vertices"
                    )));
                }
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(Error::InvalidMesh(format!("face {fi} repeats a vertex")));
            }
            let mut key = *f;
            key.sort_unstable();
            if !seen.insert(key) {
                return Err(Error::InvalidMesh(format!("face {fi} duplicates an earlier face")));
            }
        }

        let areas: Vec<f64> = faces
            .iter()
            .map(|f| triangle_area(&vertices[f[0]], &vertices[f[1]], &vertices[f[2]]))
            .collect();
        let mean = areas.iter().sum::<f64>() / areas.len() as f64;
        for (fi, &a) in areas.iter().enumerate() {
            if !(a > DEGENERATE_AREA_RATIO * mean) {
                return Err(Error::InvalidMesh(format!(
                    "face {fi} is degenerate (area {a:e}, mean area {mean:e})"
                )));
            }
        }

        let mut edge_faces: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for (fi, f) in faces.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                edge_faces.entry((a.min(b), a.max(b))).or_default().push(fi);
            }
        }
        let mut edges = Vec::with_capacity(edge_faces.len());
        for ((a, b), fs) in edge_faces {
            if fs.len() > 2 {
                return Err(Error::InvalidMesh(format!(
                    "non-manifold edge ({a}, {b}) is shared by {} faces",
                    fs.len()
                )));
            }
            edges.push(Edge { a, b, faces: fs });
        }

        Ok(Self {
            vertices,
            faces,
            edges,
            areas,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let format = MeshFormat::from_path(path).ok_or_else(|| {
            Error::InvalidArgument(format!("cannot infer mesh format of {}", path.display()))
        })?;
        Self::load_as(path, format)
    }

    pub fn load_as(path: impl AsRef<Path>, format: MeshFormat) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let ctx = path.display().to_string();
        match format {
            MeshFormat::Off => Self::parse_off(&text, &ctx),
            MeshFormat::Obj => Self::parse_obj(&text, &ctx),
        }
    }

    /// Parses an OFF file. Polygons with more than three vertices are fanned.
    pub fn parse_off(text: &str, context: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());

        let (ln, header) = lines
            .next()
            .ok_or_else(|| Error::parse(context, 1, "empty file"))?;
        let mut counts_line = None;
        if header == "OFF" {
            // counts on the next line
        } else if let Some(rest) = header.strip_prefix("OFF") {
            counts_line = Some((ln, rest.trim().to_string()));
        } else {
            return Err(Error::parse(context, ln, "missing OFF header"));
        }
        let (cl, counts) = match counts_line {
            Some(c) => c,
            None => {
                let (l, s) = lines
                    .next()
                    .ok_or_else(|| Error::parse(context, ln, "missing element counts"))?;
                (l, s.to_string())
            }
        };
        let nums = parse_numbers::<usize>(&counts, context, cl)?;
        if nums.len() < 2 {
            return Err(Error::parse(context, cl, "expected vertex and face counts"));
        }
        let (nv, nf) = (nums[0], nums[1]);

        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let (l, s) = lines
                .next()
                .ok_or_else(|| Error::parse(context, cl, "unexpected end of vertex list"))?;
            let c = parse_numbers::<f64>(s, context, l)?;
            if c.len() < 3 {
                return Err(Error::parse(context, l, "vertex needs 3 coordinates"));
            }
            vertices.push([c[0], c[1], c[2]]);
        }
        let mut faces = Vec::with_capacity(nf);
        for _ in 0..nf {
            let (l, s) = lines
                .next()
                .ok_or_else(|| Error::parse(context, cl, "unexpected end of face list"))?;
            let idx = parse_numbers::<usize>(s, context, l)?;
            let k = *idx
                .first()
                .ok_or_else(|| Error::parse(context, l, "empty face"))?;
            if k < 3 || idx.len() < k + 1 {
                return Err(Error::parse(context, l, "face needs at least 3 vertex indices"));
            }
            fan(&idx[1..=k], &mut faces);
        }
        Self::new(vertices, faces)
    }

    /// Parses the `v` and `f` records of a Wavefront OBJ file (1-based or
    /// negative relative indices; texture/normal indices ignored).
    pub fn parse_obj(text: &str, context: &str) -> Result<Self> {
        let mut vertices = Vec::new();
        let mut faces = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let ln = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            let mut toks = line.split_whitespace();
            match toks.next() {
                Some("v") => {
                    let c = toks
                        .map(|t| t.parse::<f64>())
                        .collect::<std::result::Result<Vec<_>, _>>()
                        .map_err(|e| Error::parse(context, ln, e.to_string()))?;
                    if c.len() < 3 {
                        return Err(Error::parse(context, ln, "vertex needs 3 coordinates"));
                    }
                    vertices.push([c[0], c[1], c[2]]);
                }
                Some("f") => {
                    let mut idx = Vec::new();
                    for t in toks {
                        let head = t.split('/').next().unwrap_or("");
                        let k: i64 = head
                            .parse()
                            .map_err(|_| Error::parse(context, ln, format!("bad face index '{t}'")))?;
                        let resolved = if k > 0 {
                            k - 1
                        } else if k < 0 {
                            vertices.len() as i64 + k
                        } else {
                            return Err(Error::parse(context, ln, "face index 0 is invalid in OBJ"));
                        };
                        if resolved < 0 {
                            return Err(Error::parse(context, ln, format!("face index {k} out of range")));
                        }
                        idx.push(resolved as usize);
                    }
                    if idx.len() < 3 {
                        return Err(Error::parse(context, ln, "face needs at least 3 vertex indices"));
                    }
                    fan(&idx, &mut faces);
                }
                _ => {}
            }
        }
        Self::new(vertices, faces)
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[[f64; 3]] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn face_areas(&self) -> &[f64] {
        &self.areas
    }

    pub fn total_area(&self) -> f64 {
        self.areas.iter().sum()
    }

    pub fn interior_edge_count(&self) -> usize {
        self.edges.iter().filter(|e| !e.is_boundary()).count()
    }

    pub fn boundary_edge_count(&self) -> usize {
        self.edges.iter().filter(|e| e.is_boundary()).count()
    }

    pub fn edge_length(&self, e: &Edge) -> f64 {
        super::curve::dist(&self.vertices[e.a], &self.vertices[e.b])
    }

    pub fn to_off(&self) -> String {
        let mut s = format!("OFF\n{} {} {}\n", self.vertices.len(), self.faces.len(), self.edges.len());
        for v in &self.vertices {
            s.push_str(&format!("{} {} {}\n", v[0], v[1], v[2]));
        }
        for f in &self.faces {
            s.push_str(&format!("3 {} {} {}\n", f[0], f[1], f[2]));
        }
        s
    }
}

fn fan(poly: &[usize], faces: &mut Vec<[usize; 3]>) {
    for k in 1..poly.len() - 1 {
        faces.push([poly[0], poly[k], poly[k + 1]]);
    }
}

fn parse_numbers<T: std::str::FromStr>(s: &str, context: &str, line: usize) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    s.split_whitespace()
        .map(|t| t.parse::<T>().map_err(|e| Error::parse(context, line, format!("'{t}': {e}"))))
        .collect()
}

pub(crate) fn triangle_area(a: &[f64; 3], b: &[f64; 3], c: &[f64; 3]) -> f64 {
    let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
    let x = u[1] * v[2] - u[2] * v[1];
    let y = u[2] * v[0] - u[0] * v[2];
    let z = u[0] * v[1] - u[1] * v[0];
    0.5 * (x * x + y * y + z * z).sqrt()
}
