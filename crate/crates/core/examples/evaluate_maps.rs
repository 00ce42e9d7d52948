//! Geodesic error curves and reconstruction errors of a map density in
//! separable and localized bases.

use prodmap::evaluate::{
    geodesic_error_curve, reconstruction_csv, reconstruction_error, thresholds, ReconstructionRow,
};
use prodmap::localize::{band_patch, patch_dirichlet_basis, seeds_of, BandSize};
use prodmap::maps::{density_from_pointmap, PointMap};
use prodmap::mesh::Shape;
use prodmap::product::{product_pair, separable_product_basis};
use prodmap::spectral::{eigs_smallest, EigsOptions};
use prodmap::synthetic::circle;

fn main() -> prodmap::Result<()> {
    let n = 150;
    let s = Shape::Curve(circle(n, 1.0)?);
    let op = s.assemble();
    let prod = product_pair(&op, &op, false)?;
    let gt = PointMap::identity(n);

    let shifted = PointMap::from_targets((0..n).map(|i| (i + 2) % n).collect(), n)?;
    let curve = geodesic_error_curve(&shifted, &gt, &s, &thresholds(0.1, 11))?;
    print!("{}", curve.to_csv()?);

    let k = 60;
    let mu = density_from_pointmap(&gt, &op.lumped_masses())?;
    let opts = EigsOptions::default();
    let b = eigs_smallest(&op, k, &opts)?;
    let mut rows = vec![ReconstructionRow {
        k,
        family: "separable".into(),
        error: reconstruction_error(&mu, &separable_product_basis(&b, &b, k)?, &prod)?,
    }];
    for f in [0.05, 0.25] {
        let (patch, _) = band_patch(&seeds_of(&gt), &s, &s, &prod, BandSize::AreaFraction(f))?;
        let basis = patch_dirichlet_basis(&prod, &patch, k, &opts)?;
        rows.push(ReconstructionRow {
            k,
            family: format!("band-{f}"),
            error: reconstruction_error(&mu, &basis, &prod)?,
        });
    }
    print!("{}", reconstruction_csv(&rows)?);
    Ok(())
}
