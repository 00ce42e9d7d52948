//! Localized product harmonics around a correspondence: Dirichlet harmonics of
//! a band patch and eigenfunctions of a Hamiltonian with a step potential.

use prodmap::localize::{
    band_patch, hamiltonian_basis, outside_energy_fraction, patch_dirichlet_basis, seeds_of, BandSize, Potential,
};
use prodmap::mesh::Shape;
use prodmap::product::{product_pair, ProductFunction};
use prodmap::spectral::EigsOptions;
use prodmap::synthetic::{circle, curve_pair};

fn main() -> prodmap::Result<()> {
    let (m, n, gt) = curve_pair(100)?;
    let (m, n) = (Shape::Curve(m), Shape::Curve(n));
    let prod = product_pair(&m.assemble(), &n.assemble(), false)?;
    let opts = EigsOptions::default();
    let (patch, r) = band_patch(&seeds_of(&gt), &m, &n, &prod, BandSize::AreaFraction(0.2))?;
    println!(
        "band: radius {r:.4}, {} vertices ({} interior), area fraction {:.4}",
        patch.len(),
        patch.interior_len(),
        patch.area_fraction()
    );
    let b = patch_dirichlet_basis(&prod, &patch, 20, &opts)?;
    let boundary_max = (0..b.len())
        .flat_map(|l| {
            let v = b.vector(l);
            patch.boundary().into_iter().map(move |i| v[i].abs())
        })
        .fold(0.0, f64::max);
    println!("Dirichlet harmonics: λ̄₁ = {:.4}, max |value| on the boundary = {boundary_max:e}", b.eigenvalues()[0]);

    let torus = Shape::Curve(circle(60, 1.0)?);
    let prod = product_pair(&torus.assemble(), &torus.assemble(), false)?;
    let diag: Vec<(usize, usize)> = (0..60).map(|i| (i, i)).collect();
    let (band, _) = band_patch(&diag, &torus, &torus, &prod, BandSize::AreaFraction(0.25))?;
    for nu in [10.0, 100.0, 1000.0] {
        let h = hamiltonian_basis(&prod, &Potential::step(&band, nu)?, 20, &opts)?;
        let worst = (0..h.len())
            .map(|l| outside_energy_fraction(&ProductFunction::from_vec(60, 60, &h.vector(l)).unwrap(), &band, &prod))
            .fold(0.0, f64::max);
        println!("step potential ν = {nu:6}: worst outside-band energy of 20 eigenfunctions {:.4}", worst);
    }
    Ok(())
}
