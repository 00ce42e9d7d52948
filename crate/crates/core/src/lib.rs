//! Spectral geometry on product manifolds.
//!
//! Correspondences between two shapes `M` and `N` are represented as functions
//! on the vertex grid of `M × N`. The product Laplacian is never assembled from
//! a 4D mesh; it comes from the factor matrices through Kronecker identities.

pub mod assignment;
pub mod cache;
pub mod cli;
pub mod error;
pub mod evaluate;
pub mod io;
pub mod localize;
pub mod maps;
pub mod mesh;
pub mod product;
pub mod refine;
pub mod sparse;
pub mod spectral;
pub mod synthetic;

pub use error::{Error, Result};
