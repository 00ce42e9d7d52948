//! A point map as a density on the product grid and as a functional map; the
//! functional map coefficients equal the density's product-basis coefficients.

use prodmap::maps::{density_from_pointmap, fmap_from_density, row_argmax_map, truncation_index_sets, Truncation};
use prodmap::mesh::Shape;
use prodmap::product::{product_pair, separable_product_basis, ProductBasis, ProductFunction};
use prodmap::spectral::{eigs_smallest, EigsOptions};
use prodmap::synthetic::curve_pair;

fn main() -> prodmap::Result<()> {
    let (m, n, gt) = curve_pair(120)?;
    let (m, n) = (Shape::Curve(m), Shape::Curve(n));
    let (om, on) = (m.assemble(), n.assemble());
    let prod = product_pair(&om, &on, false)?;
    let opts = EigsOptions::default();
    let bm = eigs_smallest(&om, 15, &opts)?;
    let bn = eigs_smallest(&on, 15, &opts)?;

    let mu = density_from_pointmap(&gt, &on.lumped_masses())?;
    println!("density: {} nonzeros, row-stochastic {}", mu.nnz(), mu.is_stochastic());
    let c = fmap_from_density(&mu, &bm, &bn, &om, &on)?;
    let sep = separable_product_basis(&bm, &bn, 15 * 15)?;
    let p = sep.coefficients(&prod, &mu.to_function())?;
    let worst = sep
        .pairs()
        .iter()
        .zip(&p)
        .map(|(&(i, j, _), &pv)| (c.get(i, j) - pv).abs())
        .fold(0.0, f64::max);
    println!("functional map {:?}; max |c_ij − p_ij| = {worst:.2e}", c.dims());

    let pairs = truncation_index_sets(bm.eigenvalues(), bn.eigenvalues(), 60, Truncation::ProductOrdered)?;
    let c60 = c.restricted_to(&pairs)?;
    let phi = bm.full_vectors();
    let psi = bn.full_vectors();
    let f = ProductFunction::new(&phi * c60.matrix() * psi.transpose());
    let back = row_argmax_map(&f);
    let exact = (0..back.len()).filter(|&x| back.target(x) == gt.target(x)).count();
    println!("60 product-ordered coefficients: row argmax recovers {exact}/{} matches", back.len());
    Ok(())
}
