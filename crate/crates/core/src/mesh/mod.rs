//! Mesh loading, FEM assembly and graph geodesics.

mod curve;
mod fem;
mod geodesic;
mod tri;

use std::path::Path;

pub use curve::CurveMesh;
pub use fem::{assemble_1d, assemble_2d, lump_mass, negative_cotangent_weights, OperatorPair};
pub use geodesic::{distance_matrix, geodesic_distances, DistanceField, EdgeGraph};
pub use tri::{Edge, MeshFormat, TriMesh, DEGENERATE_AREA_RATIO};

use crate::error::{Error, Result};

/// Either kind of factor manifold.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Curve(CurveMesh),
    Tri(TriMesh),
}

impl Shape {
    /// Loads by extension: `.off`/`.obj` are triangle meshes, anything else is
    /// read as a polyline.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        match MeshFormat::from_path(path) {
            Some(f) => TriMesh::load_as(path, f).map(Shape::Tri),
            None => CurveMesh::load(path).map(Shape::Curve),
        }
    }

    /// Loads with an explicit intrinsic dimension (1 = polyline, 2 = OFF/OBJ).
    pub fn load_with_dim(path: impl AsRef<Path>, dim: u8) -> Result<Self> {
        let path = path.as_ref();
        match dim {
            1 => CurveMesh::load(path).map(Shape::Curve),
            2 => TriMesh::load(path).map(Shape::Tri),
            d => Err(Error::InvalidArgument(format!("unsupported manifold dimension {d}"))),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Shape::Curve(c) => c.len(),
            Shape::Tri(t) => t.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> u8 {
        match self {
            Shape::Curve(_) => 1,
            Shape::Tri(_) => 2,
        }
    }

    pub fn assemble(&self) -> OperatorPair {
        match self {
            Shape::Curve(c) => assemble_1d(c),
            Shape::Tri(t) => assemble_2d(t),
        }
    }

    /// Total length (curves) or area (surfaces).
    pub fn measure(&self) -> f64 {
        match self {
            Shape::Curve(c) => c.total_length(),
            Shape::Tri(t) => t.total_area(),
        }
    }

    pub fn for_each_edge(&self, mut f: impl FnMut(usize, usize, f64)) {
        match self {
            Shape::Curve(c) => {
                let n = c.len();
                for (i, &l) in c.edge_lengths().iter().enumerate() {
                    f(i, (i + 1) % n, l);
                }
            }
            Shape::Tri(t) => {
                for e in t.edges() {
                    f(e.a, e.b, t.edge_length(e));
                }
            }
        }
    }

    pub fn max_edge_length(&self) -> f64 {
        let mut m: f64 = 0.0;
        self.for_each_edge(|_, _, l| m = m.max(l));
        m
    }

    /// Largest graph distance between two vertices.
    pub fn diameter(&self) -> Result<f64> {
        Ok(distance_matrix(self)?
            .iter()
            .flat_map(|r| r.iter().copied())
            .filter(|d| d.is_finite())
            .fold(0.0, f64::max))
    }
}
