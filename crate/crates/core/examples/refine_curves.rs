//! Refines sparse seed correspondences between the bundled curves and compares
//! the result with the input and with a nearest-seed baseline.
//!
//! cargo run --release --example refine_curves [MISMATCHES] [RNG_SEED]

use prodmap::evaluate::{geodesic_error_curve, thresholds};
use prodmap::mesh::Shape;
use prodmap::refine::{nearest_matched_extension, refine, Initial, RefineConfig};
use prodmap::synthetic::{add_mismatches, curve_pair, sparse_seeds};

fn main() -> prodmap::Result<()> {
    let mut args = std::env::args().skip(1);
    let mismatches: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);
    let rng_seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(1);

    let (m, n, gt) = curve_pair(200)?;
    let (m, n) = (Shape::Curve(m), Shape::Curve(n));
    let seeds = add_mismatches(&sparse_seeds(&gt, 10), &gt, mismatches, rng_seed);
    let cfg = RefineConfig::for_shapes(&m, &n)?;

    let start = std::time::Instant::now();
    let (out, trace) = refine(&Initial::Map(seeds.clone()), &m, &n, &cfg, Some(&gt))?;
    let elapsed = start.elapsed();
    print!("{}", trace.to_csv()?);

    let ts = thresholds(0.25, 26);
    let (baseline, _) = nearest_matched_extension(&seeds, &m)?;
    for (name, pm) in [("input", &seeds), ("nearest seed", &baseline), ("refined", &out)] {
        let c = geodesic_error_curve(pm, &gt, &n, &ts)?;
        println!("{name:>12}: exact {:.3}  area {:.4}", c.fractions[0], c.normalized_area());
    }
    println!("refinement took {:.1} s", elapsed.as_secs_f64());
    Ok(())
}
