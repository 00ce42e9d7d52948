use faer::{Mat, MatRef};

use crate::mesh::OperatorPair;
use crate::sparse::{self, SparseMat};

/// A symmetric generalized eigenproblem `W x = λ S x` given by how to apply
/// its two operators to a block of vectors.
///
/// Implementations that can hand out explicit sparse matrices get the
/// shift-invert solver; the others fall back to a matrix-free iteration.
pub trait SymmetricPencil {
    fn dim(&self) -> usize;

    fn apply_stiffness(&self, x: MatRef<'_, f64>) -> Mat<f64>;

    fn apply_mass(&self, x: MatRef<'_, f64>) -> Mat<f64>;

    fn stiffness_diagonal(&self) -> Vec<f64>;

    fn mass_diagonal(&self) -> Vec<f64>;

    /// Explicit `(W, S)` when available.
    fn sparse(&self) -> Option<(&SparseMat, &SparseMat)> {
        None
    }
}

/// An explicit pair of sparse symmetric matrices.
#[derive(Debug, Clone)]
pub struct SparsePencil {
    pub stiffness: SparseMat,
    pub mass: SparseMat,
}

impl SparsePencil {
    pub fn new(stiffness: SparseMat, mass: SparseMat) -> Self {
        Self { stiffness, mass }
    }
}

impl SymmetricPencil for SparsePencil {
    fn dim(&self) -> usize {
        self.stiffness.nrows()
    }

    fn apply_stiffness(&self, x: MatRef<'_, f64>) -> Mat<f64> {
        sparse::mul(&self.stiffness, x)
    }

    fn apply_mass(&self, x: MatRef<'_, f64>) -> Mat<f64> {
        sparse::mul(&self.mass, x)
    }

    fn stiffness_diagonal(&self) -> Vec<f64> {
        sparse::diagonal(&self.stiffness)
    }

    fn mass_diagonal(&self) -> Vec<f64> {
        sparse::diagonal(&self.mass)
    }

    fn sparse(&self) -> Option<(&SparseMat, &SparseMat)> {
        Some((&self.stiffness, &self.mass))
    }
}

impl SymmetricPencil for OperatorPair {
    fn dim(&self) -> usize {
        self.n()
    }

    fn apply_stiffness(&self, x: MatRef<'_, f64>) -> Mat<f64> {
        sparse::mul(self.stiffness(), x)
    }

    fn apply_mass(&self, x: MatRef<'_, f64>) -> Mat<f64> {
        sparse::mul(self.mass(), x)
    }

    fn stiffness_diagonal(&self) -> Vec<f64> {
        sparse::diagonal(self.stiffness())
    }

    fn mass_diagonal(&self) -> Vec<f64> {
        sparse::diagonal(self.mass())
    }

    fn sparse(&self) -> Option<(&SparseMat, &SparseMat)> {
        Some((self.stiffness(), self.mass()))
    }
}

/// Hides the explicit matrices of another pencil, forcing the matrix-free path.
pub struct MatrixFree<'a, P: SymmetricPencil + ?Sized>(pub &'a P);

impl<P: SymmetricPencil + ?Sized> SymmetricPencil for MatrixFree<'_, P> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn apply_stiffness(&self, x: MatRef<'_, f64>) -> Mat<f64> {
        self.0.apply_stiffness(x)
    }
    fn apply_mass(&self, x: MatRef<'_, f64>) -> Mat<f64> {
        self.0.apply_mass(x)
    }
    fn stiffness_diagonal(&self) -> Vec<f64> {
        self.0.stiffness_diagonal()
    }
    fn mass_diagonal(&self) -> Vec<f64> {
        self.0.mass_diagonal()
    }
}

pub(crate) fn apply_mass_vec<P: SymmetricPencil + ?Sized>(p: &P, x: &[f64]) -> Vec<f64> {
    let y = p.apply_mass(MatRef::from_column_major_slice(x, x.len(), 1));
    (0..y.nrows()).map(|i| y[(i, 0)]).collect()
}
