//! Product Laplacian from two factors, its separable eigenbasis, and the check
//! that products of factor eigenfunctions are product eigenfunctions.

use prodmap::mesh::Shape;
use prodmap::product::{product_pair, separable_product_basis, ProductBasis};
use prodmap::spectral::{eigs_smallest, EigsOptions};
use prodmap::synthetic::curve_pair;

fn main() -> prodmap::Result<()> {
    let (m, n, _) = curve_pair(80)?;
    let (m, n) = (Shape::Curve(m), Shape::Curve(n));
    let (om, on) = (m.assemble(), n.assemble());
    let prod = product_pair(&om, &on, false)?;
    let opts = EigsOptions::default();
    let bm = eigs_smallest(&om, 12, &opts)?;
    let bn = eigs_smallest(&on, 12, &opts)?;
    let sep = separable_product_basis(&bm, &bn, 30)?;
    println!("grid {:?}, {} product functions", prod.grid(), sep.len());
    for (l, &(i, j, lam)) in sep.pairs().iter().enumerate().take(10) {
        let f = sep.function(l);
        let wf = prod.apply_stiffness(&f)?;
        let sf = prod.apply_mass(&f)?;
        let r = prod.norm(&wf.combine(1.0, &sf, -lam)?)?;
        let (rm, rn) = sep.factor_residuals(l);
        println!("ξ_{l:<2} = φ_{i} ψ_{j}: λ = {lam:.4}, product residual {r:.1e}, factor residuals {rm:.1e} {rn:.1e}");
    }
    if let Some(t) = sep.tie_split() {
        println!("note: the cut at k = {} splits a cluster of equal eigenvalues {t:?}", sep.len());
    }
    let f = sep.function(3).combine(2.0, &sep.function(7), -0.5)?;
    let c = sep.coefficients(&prod, &f)?;
    println!("coefficients of 2ξ₃ − 0.5ξ₇: c₃ = {:.6}, c₇ = {:.6}", c[3], c[7]);
    Ok(())
}
