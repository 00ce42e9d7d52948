//! Blur-and-sharpen map refinement: heat diffusion of the current density in
//! a patch harmonic basis, thresholding into a smaller patch, and a sparse
//! linear assignment back to a point map.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::assignment::sharpen_assignment;
use crate::error::{Error, Result};
use crate::evaluate::geodesic_errors;
use crate::localize::{patch_dirichlet_basis, seed_distance_field, Patch};
use crate::maps::{clamp_negative, density_from_pointmap, MapDensity, PointMap};
use crate::mesh::{EdgeGraph, Shape};
use crate::product::{product_pair, ProductBasis, ProductFunction, ProductOperator};
use crate::spectral::{EigenBasis, EigsOptions, Provenance};

/// Negative mass fraction above which a diffusion step is reported.
pub const CLAMP_WARNING: f64 = 0.05;

/// Refinement settings. Times are in squared length units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefineConfig {
    pub t_max: f64,
    pub t_min: f64,
    pub iterations: usize,
    /// Patch harmonics per iteration.
    pub k: usize,
    /// Keep entries at least `tau` times their row maximum.
    pub tau: f64,
    /// Entries kept per row regardless of `tau`.
    pub min_candidates: usize,
    /// Area fraction of the band around the input correspondence used as the
    /// first patch; `None` starts from the whole product. Ignored when
    /// `initial_patch` is set.
    #[serde(default)]
    pub initial_band: Option<f64>,
    #[serde(skip)]
    pub initial_patch: Option<Patch>,
    #[serde(default)]
    pub eigs: EigsOptions,
}

impl RefineConfig {
    /// Defaults scaled by the product diameter `D = √(diam_M² + diam_N²)`:
    /// `t_max = (0.03 D)²`, `t_min = (0.005 D)²`, 8 iterations, `k = 120`,
    /// `τ = 0.3`, three candidates per row, and a first patch covering 25% of
    /// the product around the input.
    pub fn for_shapes(shape_m: &Shape, shape_n: &Shape) -> Result<Self> {
        let d = product_diameter(shape_m, shape_n)?;
        Ok(Self {
            t_max: (0.03 * d).powi(2),
            t_min: (0.005 * d).powi(2),
            iterations: 8,
            k: 120,
            tau: 0.3,
            min_candidates: 3,
            initial_band: Some(0.25),
            initial_patch: None,
            eigs: EigsOptions::default(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_min > 0.0 && self.t_max >= self.t_min && self.t_max.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "need t_max >= t_min > 0, got t_max = {}, t_min = {}",
                self.t_max, self.t_min
            )));
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(Error::InvalidArgument(format!("threshold {} must lie in (0, 1)", self.tau)));
        }
        if self.min_candidates < 1 {
            return Err(Error::InvalidArgument("min_candidates must be at least 1".into()));
        }
        if let Some(f) = self.initial_band {
            if !(f > 0.0 && f <= 1.0) {
                return Err(Error::InvalidArgument(format!("initial band fraction {f} must lie in (0, 1]")));
            }
        }
        if self.iterations < 1 || self.k < 1 {
            return Err(Error::InvalidArgument("iterations and k must be positive".into()));
        }
        Ok(())
    }

    /// `T_i = t_max (t_min / t_max)^{i / (iterations − 1)}`.
    pub fn time(&self, i: usize) -> f64 {
        if self.iterations <= 1 {
            return self.t_max;
        }
        self.t_max * (self.t_min / self.t_max).powf(i as f64 / (self.iterations - 1) as f64)
    }
}

/// `√(diam_M² + diam_N²)` with geodesic factor diameters.
pub fn product_diameter(shape_m: &Shape, shape_n: &Shape) -> Result<f64> {
    Ok(shape_m.diameter()?.hypot(shape_n.diameter()?))
}

/// One refinement iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct RefineRecord {
    pub iteration: usize,
    pub time: f64,
    /// Area fraction of the patch the diffusion ran on.
    pub patch_fraction: f64,
    pub objective: f64,
    pub mean_err: Option<f64>,
    pub max_err: Option<f64>,
    pub k_used: usize,
    /// Fraction of absolute mass removed by clamping negative diffusion values.
    pub clamped_fraction: f64,
    pub greedy_rows: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RefineTrace {
    pub records: Vec<RefineRecord>,
    /// Stopped early because the map did not change.
    pub converged_early: bool,
    /// Final rows given the target of their nearest matched neighbor.
    pub filled_rows: Vec<usize>,
}

impl RefineTrace {
    /// `iteration,time,patch_fraction,objective,mean_err,max_err`; errors are
    /// empty without ground truth.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| Error::InvalidArgument(format!("csv: {e}"));
        w.write_record(["iteration", "time", "patch_fraction", "objective", "mean_err", "max_err"])
            .map_err(err)?;
        let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
        for r in &self.records {
            w.write_record([
                r.iteration.to_string(),
                r.time.to_string(),
                r.patch_fraction.to_string(),
                r.objective.to_string(),
                opt(r.mean_err),
                opt(r.max_err),
            ])
            .map_err(err)?;
        }
        Ok(String::from_utf8(w.into_inner().map_err(|e| Error::InvalidArgument(e.to_string()))?).expect("utf-8"))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        crate::io::write_atomic(path, self.to_csv()?.as_bytes())
    }
}

/// `u_T = Σ_ℓ e^{−Tγ_ℓ} ⟨ξ_ℓ, u_0⟩_S ξ_ℓ`.
pub fn heat_diffuse(u0: &ProductFunction, basis: &EigenBasis, prod: &ProductOperator, t: f64) -> Result<ProductFunction> {
    if basis.provenance() != Provenance::PatchDirichlet {
        return Err(Error::Provenance {
            expected: "patch-dirichlet",
            got: basis.provenance().to_string(),
        });
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument(format!("diffusion time {t} must be finite and nonnegative")));
    }
    let mut c = ProductBasis::coefficients(basis, prod, u0)?;
    for (c, g) in c.iter_mut().zip(basis.eigenvalues()) {
        *c *= (-t * g).exp();
    }
    ProductBasis::synthesize(basis, prod, &c)
}

/// Keeps `(x, y)` with `u(x, y) ≥ τ·max_y u(x, ·)` and, in every row with a
/// positive entry, its `q` largest entries.
pub fn threshold_patch(u: &ProductFunction, tau: f64, q: usize, prod: &ProductOperator) -> Result<Patch> {
    let (m, n) = u.dims();
    if prod.grid() != (m, n) {
        return Err(Error::dims("product grid", prod.len(), m * n));
    }
    let mut keep = Vec::new();
    let mut any = false;
    for x in 0..m {
        let row = u.row(x);
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !(max > 0.0) {
            continue;
        }
        any = true;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
        let mut kept = vec![false; n];
        for &y in order.iter().take(q) {
            kept[y] = true;
        }
        for (y, &v) in row.iter().enumerate() {
            if v > 0.0 && v >= tau * max {
                kept[y] = true;
            }
        }
        keep.extend((0..n).filter(|&y| kept[y]).map(|y| prod.index(x, y)));
    }
    if !any {
        return Err(Error::Refinement("diffusion vanished; reduce T or increase k".into()));
    }
    Patch::from_indices(prod, keep)
}

/// Gives every unmatched source vertex the target of its geodesically
/// nearest matched vertex. Returns the filled map and the filled rows.
pub fn nearest_matched_extension(pm: &PointMap, shape_m: &Shape) -> Result<(PointMap, Vec<usize>)> {
    if pm.len() != shape_m.len() {
        return Err(Error::dims("source vertices", shape_m.len(), pm.len()));
    }
    if pm.matched_count() == 0 {
        return Err(Error::InvalidArgument("map has no matched vertex to extend from".into()));
    }
    let graph = EdgeGraph::of(shape_m);
    let mut out = pm.clone();
    let mut filled = Vec::new();
    for x in 0..pm.len() {
        if pm.target(x).is_some() {
            continue;
        }
        let d = graph.distances_from(&[x])?.distances;
        let nearest = (0..pm.len())
            .filter(|&s| pm.target(s).is_some())
            .min_by(|&a, &b| d[a].total_cmp(&d[b]).then(a.cmp(&b)))
            .expect("at least one match");
        out.set(x, pm.target(nearest));
        filled.push(x);
    }
    Ok((out, filled))
}

/// Initial correspondence: a sparse point map or a soft map.
#[derive(Debug, Clone, PartialEq)]
pub enum Initial {
    Map(PointMap),
    Density(MapDensity),
}

/// The largest positive entry of every row, as seed pairs.
fn row_peaks(u: &ProductFunction) -> Vec<(usize, usize)> {
    let (m, n) = u.dims();
    (0..m)
        .filter_map(|x| {
            let (y, v) = (0..n).map(|y| (y, u.get(x, y))).fold((0, 0.0), |a, b| if b.1 > a.1 { b } else { a });
            (v > 0.0).then_some((x, y))
        })
        .collect()
}

/// Smallest band around `seeds` covering at least `fraction` of the product area.
fn covering_band(
    seeds: &[(usize, usize)],
    shape_m: &Shape,
    shape_n: &Shape,
    prod: &ProductOperator,
    fraction: f64,
) -> Result<Patch> {
    let dist = seed_distance_field(seeds, shape_m, shape_n)?.to_vec();
    let lumped = prod.lumped_masses().to_vec();
    let mut order: Vec<usize> = (0..dist.len()).collect();
    order.sort_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(a.cmp(&b)));
    let goal = fraction * prod.total_mass();
    let mut covered = 0.0;
    let mut end = order.len();
    for (i, &v) in order.iter().enumerate() {
        covered += lumped[v];
        if covered >= goal {
            // take every vertex tied at this radius
            end = i + 1 + order[i + 1..].iter().take_while(|&&w| dist[w] <= dist[v]).count();
            break;
        }
    }
    order.truncate(end);
    Patch::from_indices(prod, order)
}

/// Runs the blur-and-sharpen loop from `initial`.
///
/// Each iteration diffuses the current density with `k` Dirichlet harmonics
/// of the current patch, thresholds it, and solves an assignment on the
/// thresholded set. The next patch is the thresholded set grown by one ring of
/// grid neighbors, intersected with the current patch.
pub fn refine(
    initial: &Initial,
    shape_m: &Shape,
    shape_n: &Shape,
    cfg: &RefineConfig,
    ground_truth: Option<&PointMap>,
) -> Result<(PointMap, RefineTrace)> {
    cfg.validate()?;
    let op_m = shape_m.assemble();
    let op_n = shape_n.assemble();
    let prod = product_pair(&op_m, &op_n, false)?;
    let (m, n) = prod.grid();
    let lumped_n = op_n.lumped_masses();
    let mut mu = match initial {
        Initial::Map(pm) => {
            if (pm.len(), pm.n_target()) != (m, n) {
                return Err(Error::dims("initial map", m * n, pm.len() * pm.n_target()));
            }
            density_from_pointmap(pm, &lumped_n)?.to_function()
        }
        Initial::Density(d) => {
            if d.grid() != (m, n) {
                return Err(Error::dims("initial density", m * n, d.grid().0 * d.grid().1));
            }
            d.to_function()
        }
    };
    if mu.max_abs() == 0.0 {
        return Err(Error::InvalidArgument("initial correspondence is empty".into()));
    }
    if let Some(gt) = ground_truth {
        if (gt.len(), gt.n_target()) != (m, n) {
            return Err(Error::dims("ground truth", m * n, gt.len() * gt.n_target()));
        }
    }

    let mut patch = match &cfg.initial_patch {
        Some(p) if p.grid() == (m, n) => p.clone(),
        Some(_) => return Err(Error::InvalidArgument("initial patch is for a different grid".into())),
        None => match cfg.initial_band {
            Some(f) if f < 1.0 => covering_band(&row_peaks(&mu), shape_m, shape_n, &prod, f)?,
            _ => Patch::full(&prod),
        },
    };
    let mut trace = RefineTrace::default();
    let mut current: Option<PointMap> = None;
    for i in 0..cfg.iterations {
        let t = cfg.time(i);
        let interior = patch.interior_len();
        let mut k = cfg.k;
        if interior <= k {
            k = interior / 2;
            log::warn!("patch interior has {interior} vertices; using k = {k}");
        }
        if k == 0 {
            return Err(Error::Refinement(format!("patch interior too small ({interior} vertices)")));
        }
        let basis = patch_dirichlet_basis(&prod, &patch, k, &cfg.eigs)?;
        let u = heat_diffuse(&mu, &basis, &prod, t)?;
        let (u, clamped) = clamp_negative(&u);
        if clamped >= CLAMP_WARNING {
            log::warn!("iteration {i}: clamping removed {:.1}% of the diffused mass", 100.0 * clamped);
        }
        let kept = threshold_patch(&u, cfg.tau, cfg.min_candidates, &prod)?.intersect(&patch, &prod)?;
        let assignment = sharpen_assignment(&u, &kept)?;
        let next = kept.dilate(&prod)?.intersect(&patch, &prod)?;

        let (mean_err, max_err) = match ground_truth {
            Some(gt) => {
                let e = geodesic_errors(&assignment.map, gt, shape_n)?;
                (e.mean(), e.max())
            }
            None => (None, None),
        };
        log::info!(
            "iteration {i}: T = {t:.3e}, patch {:.4}, objective {:.6e}, mean error {}",
            patch.area_fraction(),
            assignment.objective,
            mean_err.map_or("-".into(), |e| format!("{e:.4}"))
        );
        trace.records.push(RefineRecord {
            iteration: i,
            time: t,
            patch_fraction: patch.area_fraction(),
            objective: assignment.objective,
            mean_err,
            max_err,
            k_used: k,
            clamped_fraction: clamped,
            greedy_rows: assignment.greedy.len(),
        });

        let unchanged = current.as_ref() == Some(&assignment.map);
        mu = density_from_pointmap(&assignment.map, &lumped_n)?.to_function();
        current = Some(assignment.map);
        patch = next;
        if unchanged {
            trace.converged_early = true;
            break;
        }
    }

    let pm = current.expect("at least one iteration");
    let (pm, filled) = if pm.is_total() {
        (pm, Vec::new())
    } else {
        nearest_matched_extension(&pm, shape_m)?
    };
    if !filled.is_empty() {
        log::warn!("{} rows unmatched after refinement; filled from nearest matched neighbors", filled.len());
    }
    trace.filled_rows = filled;
    Ok((pm, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::localize::{band_patch, BandSize};
    use crate::mesh::CurveMesh;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn circle(n: usize) -> Shape {
        let pts = (0..n)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / n as f64;
                vec![t.cos(), t.sin()]
            })
            .collect();
        Shape::Curve(CurveMesh::new(pts).unwrap())
    }

    fn setup(n: usize) -> (Shape, ProductOperator, Patch, EigenBasis) {
        let s = circle(n);
        let op = s.assemble();
        let prod = product_pair(&op, &op, false).unwrap();
        let seeds: Vec<_> = (0..n).map(|i| (i, i)).collect();
        let (p, _) = band_patch(&seeds, &s, &s, &prod, BandSize::AreaFraction(0.3)).unwrap();
        let b = patch_dirichlet_basis(&prod, &p, 12, &EigsOptions::default()).unwrap();
        (s, prod, p, b)
    }

    #[test]
    fn semigroup_and_projection_limit() {
        let (_, prod, _, b) = setup(20);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let c: Vec<f64> = (0..b.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let u = ProductBasis::synthesize(&b, &prod, &c).unwrap();
        let two = heat_diffuse(&heat_diffuse(&u, &b, &prod, 0.01).unwrap(), &b, &prod, 0.02).unwrap();
        let one = heat_diffuse(&u, &b, &prod, 0.03).unwrap();
        assert!(two.combine(1.0, &one, -1.0).unwrap().max_abs() <= 1e-10 * one.max_abs().max(1.0));

        let f = ProductFunction::from_fn(20, 20, |i, p| ((i * 7 + p * 3) % 5) as f64);
        let zero = heat_diffuse(&f, &b, &prod, 0.0).unwrap();
        let proj = b.project(&prod, &f).unwrap();
        assert!(zero.combine(1.0, &proj, -1.0).unwrap().max_abs() < 1e-8);

        let x3 = ProductFunction::from_vec(20, 20, &b.vector(3)).unwrap();
        let d = heat_diffuse(&x3, &b, &prod, 0.05).unwrap();
        let expect = x3.combine((-0.05 * b.eigenvalues()[3]).exp(), &x3, 0.0).unwrap();
        assert!(d.combine(1.0, &expect, -1.0).unwrap().max_abs() < 1e-10);
    }

    #[test]
    fn diffusion_needs_a_patch_basis() {
        let s = circle(20);
        let op = s.assemble();
        let prod = product_pair(&op, &op, false).unwrap();
        let g = crate::spectral::eigs_smallest(&prod, 4, &EigsOptions::default()).unwrap();
        assert!(heat_diffuse(&ProductFunction::zeros(20, 20), &g, &prod, 1.0).is_err());
    }

    #[test]
    fn threshold_examples() {
        let s = circle(10);
        let op = s.assemble();
        let prod = product_pair(&op, &op, false).unwrap();
        let u = ProductFunction::from_fn(10, 10, |i, p| if p == (i + 2) % 10 { 1.0 } else { 0.0 });
        let p = threshold_patch(&u, 0.5, 3, &prod).unwrap();
        assert_eq!(p.len(), 30);
        let g = ProductFunction::from_fn(10, 10, |i, p| if (i + p) % 3 == 0 { (i + p + 1) as f64 } else { 0.0 });
        let loose = threshold_patch(&g, 1e-12, 1, &prod).unwrap();
        let support = (0..100).filter(|&v| g.get(v % 10, v / 10) > 0.0).count();
        assert_eq!(loose.len(), support);
        let tight = threshold_patch(&g, 0.8, 1, &prod).unwrap();
        assert!(tight.vertices().iter().all(|&v| loose.contains(v)));
        assert!(threshold_patch(&ProductFunction::zeros(10, 10), 0.5, 3, &prod).is_err());
    }

    #[test]
    fn config_checks() {
        let s = circle(30);
        let mut c = RefineConfig::for_shapes(&s, &s).unwrap();
        c.validate().unwrap();
        assert!((c.time(0) - c.t_max).abs() < 1e-15);
        assert!((c.time(c.iterations - 1) - c.t_min).abs() < 1e-15);
        c.tau = 1.0;
        assert!(c.validate().is_err());
        c.tau = 0.3;
        c.t_min = 2.0 * c.t_max;
        assert!(c.validate().is_err());
    }

    #[test]
    fn exact_self_map_is_kept() {
        let s = circle(40);
        let gt = PointMap::from_targets((0..40).map(|i| (i + 5) % 40).collect(), 40).unwrap();
        let mut cfg = RefineConfig::for_shapes(&s, &s).unwrap();
        cfg.iterations = 1;
        cfg.k = 30;
        let (pm, trace) = refine(&Initial::Map(gt.clone()), &s, &s, &cfg, Some(&gt)).unwrap();
        assert_eq!(pm, gt);
        assert_eq!(trace.records[0].mean_err, Some(0.0));
    }

    #[test]
    fn nearest_extension_fills_gaps() {
        let s = circle(10);
        let pm = PointMap::new((0..10).map(|i| (i % 5 == 0).then_some(i)).collect(), 10).unwrap();
        let (full, filled) = nearest_matched_extension(&pm, &s).unwrap();
        assert!(full.is_total());
        assert_eq!(filled.len(), 8);
        assert_eq!(full.target(1), Some(0));
        assert_eq!(full.target(4), Some(5));
    }
}
