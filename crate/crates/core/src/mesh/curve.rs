use std::path::Path;

use crate::error::{Error, Result};

/// A closed polygonal curve discretized as a 2-regular cycle graph: vertex `i`
/// is joined to `i + 1 (mod n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveMesh {
    vertices: Vec<[f64; 3]>,
    ambient_dim: usize,
    edge_lengths: Vec<f64>,
}

impl CurveMesh {
    /// Builds a curve from points in the plane or in space. Closure is implied.
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        if points.len() < 3 {
            return Err(Error::InvalidMesh(format!(
                "a closed curve needs at least 3 points, got {}",
                points.len()
            )));
        }
        let ambient_dim = points[0].len();
        if !(2..=3).contains(&ambient_dim) {
            return Err(Error::InvalidMesh(format!(
                "curve points must have 2 or 3 coordinates, got {ambient_dim}"
            )));
        }
        let mut vertices = Vec::with_capacity(points.len());
        for (i, p) in points.iter().enumerate() {
            if p.len() != ambient_dim {
                return Err(Error::InvalidMesh(format!(
                    "point {i} has {} coordinates, expected {ambient_dim}",
                    p.len()
                )));
            }
            if p.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidMesh(format!("point {i} is not finite")));
            }
            vertices.push([p[0], p[1], if ambient_dim == 3 { p[2] } else { 0.0 }]);
        }
        let n = vertices.len();
        let mut edge_lengths = Vec::with_capacity(n);
        for i in 0..n {
            let l = dist(&vertices[i], &vertices[(i + 1) % n]);
            if l <= 0.0 {
                return Err(Error::InvalidMesh(format!(
                    "zero-length edge between vertices {i} and {}",
                    (i + 1) % n
                )));
            }
            edge_lengths.push(l);
        }
        Ok(Self {
            vertices,
            ambient_dim,
            edge_lengths,
        })
    }

    /// Plain-text polyline: one point per line (2 or 3 whitespace-separated
    /// coordinates), `#` comments and blank lines ignored.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, context: &str) -> Result<Self> {
        let mut points = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let coords = line
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::parse(context, lineno + 1, e.to_string()))?;
            points.push(coords);
        }
        Self::new(points)
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

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    /// Length of edge `(i, i + 1 mod n)`.
    pub fn edge_lengths(&self) -> &[f64] {
        &self.edge_lengths
    }

    pub fn total_length(&self) -> f64 {
        self.edge_lengths.iter().sum()
    }

    /// Serializes in the polyline format accepted by [`CurveMesh::parse`].
    pub fn to_polyline(&self) -> String {
        let mut s = String::new();
        for v in &self.vertices {
            let coords = &v[..self.ambient_dim];
            let line: Vec<String> = coords.iter().map(|c| c.to_string()).collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        s
    }
}

pub(crate) fn dist(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}
