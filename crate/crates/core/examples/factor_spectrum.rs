//! Smallest Laplace–Beltrami eigenpairs of a circle and a sphere.
//!
//! The circle eigenvalues are compared with the closed form of the discrete
//! operator and with the continuum values `j²`; the sphere ones with `l(l+1)`.

use std::f64::consts::PI;

use prodmap::mesh::Shape;
use prodmap::spectral::{eigs_smallest, EigsOptions};
use prodmap::synthetic::{circle, icosphere};

fn main() -> prodmap::Result<()> {
    let opts = EigsOptions::default();
    for n in [32, 64, 128] {
        let op = Shape::Curve(circle(n, 1.0)?).assemble();
        let b = eigs_smallest(&op, 3, &opts)?;
        let h = 2.0 * (PI / n as f64).sin();
        let th = 2.0 * PI / n as f64;
        let exact = 6.0 / (h * h) * (1.0 - th.cos()) / (2.0 + th.cos());
        println!("circle n = {n:4}: λ₂ = {:.12} discrete {exact:.12} continuum 1", b.eigenvalues()[1]);
    }

    let sphere = Shape::Tri(icosphere(3)?);
    let b = eigs_smallest(&sphere.assemble(), 16, &opts)?;
    println!("icosphere ({} vertices), expected 0, 2 (x3), 6 (x5), 12 (x7):", sphere.len());
    for (i, l) in b.eigenvalues().iter().enumerate() {
        println!("  λ_{i:<2} = {l:.4}   residual {:.1e}", b.residual_norms()[i]);
    }
    Ok(())
}
