//! FEM stiffness and mass of a curve and a triangle mesh, exported as triplets.
//!
//! cargo run --release --example assemble_operators [OUT_DIR]

use prodmap::io::save_triplets;
use prodmap::mesh::{lump_mass, negative_cotangent_weights, Shape};
use prodmap::sparse::nnz;
use prodmap::synthetic::{circle, icosphere};

fn main() -> prodmap::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| std::env::temp_dir().display().to_string());

    let curve = Shape::Curve(circle(64, 1.0)?);
    let op = curve.assemble();
    println!("circle: n = {}, nnz(W) = {}, total mass = {:.6} (2π = {:.6})", op.n(), nnz(op.stiffness()), op.total_mass(), 2.0 * std::f64::consts::PI);
    save_triplets(format!("{out}/circle64.W.txt"), op.stiffness())?;
    save_triplets(format!("{out}/circle64.S.txt"), op.mass())?;

    let sphere = Shape::Tri(icosphere(2)?);
    let op = sphere.assemble();
    let lumped = lump_mass(&op);
    println!(
        "icosphere: n = {}, area = {:.4}, lumped area = {:.4}, negative cotangent weights = {}",
        op.n(),
        op.total_mass(),
        lumped.total_mass(),
        negative_cotangent_weights(&op)
    );
    println!("triplets written to {out}");
    Ok(())
}
