//! Point maps, soft maps and functional maps, and conversions among them.

mod density;
mod fmap;
mod pointmap;

pub use density::{density_from_pointmap, soft_functional_apply, MapDensity};
pub use fmap::{basis_hash, fmap_from_density, FunctionalMapMatrix, Truncation};
pub use pointmap::PointMap;

use crate::error::{Error, Result};
use crate::product::{select_pairs, ProductBasis, ProductFunction, ProductOperator};
use crate::spectral::Provenance;

/// Band-limited reconstruction `Σ_ℓ c_ℓ ξ_ℓ`. The result is signed; see
/// [`clamp_unit`] for a probability-valued version.
pub fn density_from_coeffs<B: ProductBasis + ?Sized>(
    coeffs: &[f64],
    basis: &B,
    prod: &ProductOperator,
) -> Result<ProductFunction> {
    match basis.provenance() {
        Provenance::ProductSeparable | Provenance::PatchDirichlet | Provenance::Hamiltonian => {}
        p => {
            return Err(Error::Provenance {
                expected: "product-separable, patch-dirichlet or hamiltonian",
                got: p.to_string(),
            })
        }
    }
    basis.synthesize(prod, coeffs)
}

/// Per-row argmax; ties go to the smallest target index.
pub fn row_argmax_map(f: &ProductFunction) -> PointMap {
    let (m, n) = f.dims();
    let targets = (0..m)
        .map(|x| {
            let mut best = 0;
            for y in 1..n {
                if f.get(x, y) > f.get(x, best) {
                    best = y;
                }
            }
            best
        })
        .collect();
    PointMap::from_targets(targets, n).expect("indices in range")
}

/// Clamps every value into `[0, 1]`.
pub fn clamp_unit(f: &ProductFunction) -> ProductFunction {
    let (m, n) = f.dims();
    ProductFunction::from_fn(m, n, |i, p| f.get(i, p).clamp(0.0, 1.0))
}

/// Zeroes negative values; also returns the fraction of absolute mass removed.
pub fn clamp_negative(f: &ProductFunction) -> (ProductFunction, f64) {
    let (m, n) = f.dims();
    let (mut neg, mut total) = (0.0, 0.0);
    let g = ProductFunction::from_fn(m, n, |i, p| {
        let v = f.get(i, p);
        total += v.abs();
        if v < 0.0 {
            neg += -v;
            0.0
        } else {
            v
        }
    });
    (g, if total > 0.0 { neg / total } else { 0.0 })
}

/// Index pairs `(i, j)` of a truncated coefficient matrix.
///
/// `Rectangular` returns the full `len(α) × len(β)` block and requires `k` to
/// equal its size; `ProductOrdered` returns the first `k` pairs by `α_i + β_j`.
pub fn truncation_index_sets(alphas: &[f64], betas: &[f64], k: usize, scheme: Truncation) -> Result<Vec<(usize, usize)>> {
    match scheme {
        Truncation::Rectangular => {
            if k != alphas.len() * betas.len() {
                return Err(Error::InvalidArgument(format!(
                    "a rectangular section of {}x{} has {} pairs, not {k}",
                    alphas.len(),
                    betas.len(),
                    alphas.len() * betas.len()
                )));
            }
            Ok((0..alphas.len())
                .flat_map(|i| (0..betas.len()).map(move |j| (i, j)))
                .collect())
        }
        Truncation::ProductOrdered => Ok(select_pairs(alphas, betas, k)?
            .pairs
            .into_iter()
            .map(|(i, j, _)| (i, j))
            .collect()),
    }
}
