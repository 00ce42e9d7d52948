//! The `prodmap` command line.
//!
//! Numeric settings resolve as flag, then `--config` TOML file, then built-in
//! default. Every output gets a `<file>.manifest` companion echoing the
//! resolved settings. Exit codes: 0 success, 1 usage, 2 data error, 3 solver
//! failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use faer::Mat;
use serde::Deserialize;

use crate::cache::{cached, CacheKey, EigsCache};
use crate::error::{Error, Result};
use crate::evaluate::{geodesic_error_curve, thresholds};
use crate::io::{load_triplets, save_triplets, write_atomic};
use crate::localize::{band_patch, hamiltonian_basis, patch_dirichlet_basis, seeds_of, BandSize, Patch, Potential};
use crate::maps::{
    basis_hash, clamp_negative, density_from_pointmap, fmap_from_density, truncation_index_sets, FunctionalMapMatrix,
    MapDensity, PointMap, Truncation,
};
use crate::mesh::{lump_mass, OperatorPair, Shape};
use crate::product::{product_pair, separable_product_basis, ProductFunction};
use crate::refine::{refine, Initial, RefineConfig};
use crate::spectral::{eigs_smallest, eigs_smallest_as, EigenBasis, EigsOptions, Provenance, SparsePencil};

#[derive(Debug, Parser)]
#[command(name = "prodmap", version, about = "Spectral geometry and map refinement on product manifolds")]
pub struct Cli {
    /// Worker threads for dense linear algebra (1 = sequential, the default).
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
    /// TOML file with defaults for numeric flags; explicit flags win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Directory where eigenbases are stored and reused, keyed by a hash of
    /// mesh, operator options, k, tolerance and seed.
    #[arg(long, global = true, value_name = "DIR")]
    pub eigs_cache: Option<PathBuf>,
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Assemble stiffness W and mass S of a mesh as `i j value` triplet files.
    Assemble(AssembleArgs),
    /// Smallest generalized eigenpairs of one shape.
    Eigs(EigsArgs),
    /// Eigenbasis of the product of two shapes.
    ProductEigs(ProductEigsArgs),
    /// Convert between point maps, densities and functional maps.
    MapConvert(MapConvertArgs),
    /// Band patch around a seed correspondence.
    Band(BandArgs),
    /// Refine a sparse or noisy correspondence by diffusion and assignment.
    Refine(RefineArgs),
    /// Geodesic error curve of a map against ground truth.
    Eval(EvalArgs),
}

#[derive(Debug, Args)]
pub struct MeshOpts {
    /// Intrinsic dimension: 1 = polyline, 2 = OFF/OBJ triangles (default: by extension).
    #[arg(long, value_name = "1|2")]
    pub dim: Option<u8>,
}

#[derive(Debug, Args)]
pub struct AssembleArgs {
    /// Mesh file (.off, .obj or a polyline with one point per line).
    pub mesh: PathBuf,
    #[command(flatten)]
    pub mesh_opts: MeshOpts,
    /// Replace the consistent mass matrix by its row sums.
    #[arg(long)]
    pub lumped: bool,
    /// Output prefix; writes PREFIX.W.txt and PREFIX.S.txt.
    #[arg(long, value_name = "PREFIX")]
    pub out: PathBuf,
}

#[derive(Debug, Args, Clone, Default)]
pub struct SolverFlags {
    /// Convergence threshold on the relative residual ‖Wx − λSx‖/‖Sx‖, scaled by max(1, |λ|) (dimensionless).
    #[arg(long)]
    pub tol: Option<f64>,
    /// Seed of the random starting block (integer).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Maximum restart cycles of the iterative solver (count).
    #[arg(long)]
    pub max_cycles: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EigsArgs {
    /// Mesh file; alternatively give --stiffness and --mass.
    #[arg(long, conflicts_with_all = ["stiffness", "mass"], required_unless_present = "stiffness")]
    pub mesh: Option<PathBuf>,
    #[command(flatten)]
    pub mesh_opts: MeshOpts,
    /// Use the lumped mass matrix (with --mesh).
    #[arg(long)]
    pub lumped: bool,
    /// Stiffness triplet file.
    #[arg(long, requires = "mass")]
    pub stiffness: Option<PathBuf>,
    /// Mass triplet file.
    #[arg(long, requires = "stiffness")]
    pub mass: Option<PathBuf>,
    /// Number of eigenpairs (count).
    #[arg(short, long)]
    pub k: Option<usize>,
    #[command(flatten)]
    pub solver: SolverFlags,
    /// Output eigenbasis file; a `.manifest` text file is written next to it.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scheme {
    /// Products of factor eigenfunctions, ordered by α + β.
    Separable,
    /// Direct solve on the product operator, optionally on a patch or with a potential.
    Full,
}

#[derive(Debug, Args)]
pub struct ProductEigsArgs {
    /// First factor mesh M.
    pub mesh_m: PathBuf,
    /// Second factor mesh N.
    pub mesh_n: PathBuf,
    /// Number of product eigenpairs (count).
    #[arg(short, long)]
    pub k: Option<usize>,
    #[arg(long, value_enum, default_value = "separable")]
    pub scheme: Scheme,
    /// Eigenpairs per factor for the separable scheme (count; default k).
    #[arg(long)]
    pub factor_k: Option<usize>,
    /// Patch file; solve with Dirichlet conditions on its boundary (full scheme).
    #[arg(long, conflicts_with = "potential")]
    pub patch: Option<PathBuf>,
    /// Potential triplet file; solve W + diag(V) (full scheme).
    #[arg(long)]
    pub potential: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverFlags,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MapFormat {
    /// One target index per line, -1 for unmatched.
    Pointmap,
    /// Triplets `i j value` after a header `nM nN nnz`.
    Density,
    /// Coefficient matrix in a pair of factor bases.
    Fmap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TruncationArg {
    /// Full kM × kN block.
    Rect,
    /// First k pairs by α_i + β_j.
    ProductOrdered,
}

#[derive(Debug, Args)]
pub struct MapConvertArgs {
    /// Input map file.
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub from: MapFormat,
    #[arg(long, value_enum)]
    pub to: MapFormat,
    /// Source mesh M.
    #[arg(long)]
    pub mesh_m: PathBuf,
    /// Target mesh N.
    #[arg(long)]
    pub mesh_n: PathBuf,
    /// Eigenbasis of M (needed for functional maps).
    #[arg(long)]
    pub basis_m: Option<PathBuf>,
    /// Eigenbasis of N (needed for functional maps).
    #[arg(long)]
    pub basis_n: Option<PathBuf>,
    /// Coefficient truncation when producing a functional map.
    #[arg(long, value_enum)]
    pub truncation: Option<TruncationArg>,
    /// Number of coefficient pairs kept by product-ordered truncation (count).
    #[arg(short, long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BandArgs {
    pub mesh_m: PathBuf,
    pub mesh_n: PathBuf,
    /// Seed point map from M to N.
    pub seeds: PathBuf,
    /// Product-distance radius, in the length units of the meshes.
    #[arg(long, conflicts_with = "area_fraction")]
    pub radius: Option<f64>,
    /// Fraction of the product area covered, in (0, 1].
    #[arg(long)]
    pub area_fraction: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitialFormat {
    Pointmap,
    Density,
}

#[derive(Debug, Args)]
pub struct RefineArgs {
    pub mesh_m: PathBuf,
    pub mesh_n: PathBuf,
    /// Initial correspondence.
    pub initial: PathBuf,
    #[arg(long, value_enum, default_value = "pointmap")]
    pub initial_format: InitialFormat,
    /// Ground-truth point map; adds errors to the trace.
    #[arg(long)]
    pub gt: Option<PathBuf>,
    /// First diffusion time, in squared length units (default (0.03 D)², D the product diameter).
    #[arg(long)]
    pub t_max: Option<f64>,
    /// Last diffusion time, in squared length units (default (0.005 D)²).
    #[arg(long)]
    pub t_min: Option<f64>,
    /// Number of blur-and-sharpen iterations (count).
    #[arg(long)]
    pub iterations: Option<usize>,
    /// Patch harmonics per iteration (count).
    #[arg(short, long)]
    pub k: Option<usize>,
    /// Keep diffused values at least this fraction of their row maximum, in (0, 1).
    #[arg(long)]
    pub tau: Option<f64>,
    /// Candidates kept per row regardless of --tau (count).
    #[arg(long)]
    pub min_candidates: Option<usize>,
    /// Area fraction in (0, 1] of the first patch around the input.
    #[arg(long, conflicts_with_all = ["full_start", "patch"])]
    pub initial_band: Option<f64>,
    /// Start from the whole product instead of a band.
    #[arg(long, conflicts_with = "patch")]
    pub full_start: bool,
    /// Explicit first patch.
    #[arg(long)]
    pub patch: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverFlags,
    /// Output point map.
    #[arg(long)]
    pub out: PathBuf,
    /// Output trace CSV.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Point map to evaluate.
    pub map: PathBuf,
    /// Ground-truth point map.
    pub gt: PathBuf,
    /// Target mesh N, for geodesic distances.
    pub mesh_n: PathBuf,
    /// Largest threshold, in units of sqrt(area of N).
    #[arg(long)]
    pub max_threshold: Option<f64>,
    /// Number of evenly spaced thresholds starting at 0 (count).
    #[arg(long)]
    pub count: Option<usize>,
    /// Output CSV.
    #[arg(long)]
    pub out: PathBuf,
}

/// Contents of a `--config` file. Every key is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub threads: Option<usize>,
    pub eigs: EigsSection,
    pub band: BandSection,
    pub refine: RefineSection,
    pub eval: EvalSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EigsSection {
    pub k: Option<usize>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub max_cycles: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BandSection {
    pub radius: Option<f64>,
    pub area_fraction: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RefineSection {
    pub t_max: Option<f64>,
    pub t_min: Option<f64>,
    pub iterations: Option<usize>,
    pub k: Option<usize>,
    pub tau: Option<f64>,
    pub min_candidates: Option<usize>,
    pub initial_band: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    pub max_threshold: Option<f64>,
    pub count: Option<usize>,
}

const DEFAULT_K: usize = 20;
const DEFAULT_MAX_THRESHOLD: f64 = 0.25;
const DEFAULT_COUNT: usize = 26;

/// Key/value lines written into output manifests.
#[derive(Default)]
struct Manifest(Vec<(String, String)>);

impl Manifest {
    fn new(command: &str) -> Self {
        let mut m = Self::default();
        m.add("command", command);
        m
    }

    fn add(&mut self, k: &str, v: impl ToString) -> &mut Self {
        self.0.push((k.to_string(), v.to_string()));
        self
    }

    fn path(&mut self, k: &str, p: &Path) -> &mut Self {
        self.add(k, p.display())
    }

    fn text(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.0 {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }

    fn write_for(&self, out: &Path) -> Result<()> {
        write_atomic(crate::spectral::manifest_path(out), self.text().as_bytes())
    }
}

struct Ctx {
    file: FileConfig,
    cache: Option<EigsCache>,
}

impl Ctx {
    fn eigs_options(&self, f: &SolverFlags) -> EigsOptions {
        let d = EigsOptions::default();
        EigsOptions {
            tol: f.tol.or(self.file.eigs.tol).unwrap_or(d.tol),
            seed: f.seed.or(self.file.eigs.seed).unwrap_or(d.seed),
            max_cycles: f.max_cycles.or(self.file.eigs.max_cycles).unwrap_or(d.max_cycles),
            ..d
        }
    }

    fn k(&self, k: Option<usize>) -> usize {
        k.or(self.file.eigs.k).unwrap_or(DEFAULT_K)
    }
}

fn record_solver(m: &mut Manifest, k: usize, o: &EigsOptions) {
    m.add("k", k).add("tol", o.tol).add("seed", o.seed).add("max_cycles", o.max_cycles);
}

fn load_shape(path: &Path, opts: &MeshOpts) -> Result<Shape> {
    match opts.dim {
        Some(d) => Shape::load_with_dim(path, d),
        None => Shape::load(path),
    }
}

fn operators(shape: &Shape, lumped: bool) -> OperatorPair {
    let op = shape.assemble();
    if lumped {
        lump_mass(&op)
    } else {
        op
    }
}

fn factor_basis(ctx: &Ctx, shape: &Shape, k: usize, opts: &EigsOptions) -> Result<EigenBasis> {
    let op = shape.assemble();
    cached(
        ctx.cache.as_ref(),
        || {
            let mut key = CacheKey::new("factor");
            key.push_shape(shape).push_str("consistent").push_solve(k, opts);
            key
        },
        || eigs_smallest(&op, k, opts),
    )
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

fn assemble(a: &AssembleArgs) -> Result<()> {
    let shape = load_shape(&a.mesh, &a.mesh_opts)?;
    let op = operators(&shape, a.lumped);
    let base = a.out.display().to_string();
    let (w, s) = (PathBuf::from(format!("{base}.W.txt")), PathBuf::from(format!("{base}.S.txt")));
    save_triplets(&w, op.stiffness())?;
    save_triplets(&s, op.mass())?;
    let mut m = Manifest::new("assemble");
    m.path("mesh", &a.mesh).add("vertices", shape.len()).add("dim", shape.dim()).add("lumped", a.lumped);
    m.write_for(&w)?;
    m.write_for(&s)
}

fn eigs(ctx: &Ctx, a: &EigsArgs) -> Result<()> {
    let k = ctx.k(a.k);
    let opts = ctx.eigs_options(&a.solver);
    let mut m = Manifest::new("eigs");
    let basis = match (&a.mesh, &a.stiffness, &a.mass) {
        (Some(mesh), _, _) => {
            let shape = load_shape(mesh, &a.mesh_opts)?;
            let op = operators(&shape, a.lumped);
            m.path("mesh", mesh).add("lumped", a.lumped);
            cached(
                ctx.cache.as_ref(),
                || {
                    let mut key = CacheKey::new("factor");
                    key.push_shape(&shape)
                        .push_str(if a.lumped { "lumped" } else { "consistent" })
                        .push_solve(k, &opts);
                    key
                },
                || eigs_smallest(&op, k, &opts),
            )?
        }
        (None, Some(w), Some(s)) => {
            let pencil = SparsePencil::new(load_triplets(w)?, load_triplets(s)?);
            m.path("stiffness", w).path("mass", s);
            cached(
                ctx.cache.as_ref(),
                || {
                    let mut key = CacheKey::new("operators");
                    key.push(&read_bytes(w).unwrap_or_default())
                        .push(&read_bytes(s).unwrap_or_default())
                        .push_solve(k, &opts);
                    key
                },
                || eigs_smallest(&pencil, k, &opts),
            )?
        }
        _ => return Err(Error::InvalidArgument("give --mesh or both --stiffness and --mass".into())),
    };
    record_solver(&mut m, k, &opts);
    basis.save(&a.out, &m.0)
}

fn product_eigs(ctx: &Ctx, a: &ProductEigsArgs) -> Result<()> {
    let k = ctx.k(a.k);
    let opts = ctx.eigs_options(&a.solver);
    let sm = Shape::load(&a.mesh_m)?;
    let sn = Shape::load(&a.mesh_n)?;
    let mut m = Manifest::new("product-eigs");
    m.path("mesh_m", &a.mesh_m).path("mesh_n", &a.mesh_n);
    let basis = match a.scheme {
        Scheme::Separable => {
            if a.patch.is_some() || a.potential.is_some() {
                return Err(Error::InvalidArgument("--patch and --potential need --scheme full".into()));
            }
            let fk = a.factor_k.unwrap_or(k).min(sm.len() - 1).min(sn.len() - 1);
            m.add("scheme", "separable").add("factor_k", fk);
            let bm = factor_basis(ctx, &sm, fk, &opts)?;
            let bn = factor_basis(ctx, &sn, fk, &opts)?;
            separable_product_basis(&bm, &bn, k)?.to_eigen_basis()?
        }
        Scheme::Full => {
            m.add("scheme", "full");
            let (om, on) = (sm.assemble(), sn.assemble());
            let key = || {
                let mut key = CacheKey::new("product");
                key.push_shape(&sm).push_shape(&sn).push_solve(k, &opts);
                key
            };
            if let Some(p) = &a.patch {
                let prod = product_pair(&om, &on, false)?;
                let patch = Patch::load(p, &prod)?;
                m.path("patch", p);
                cached(
                    ctx.cache.as_ref(),
                    || {
                        let mut k2 = key();
                        k2.push_str("patch").push_str(&patch.to_text());
                        k2
                    },
                    || patch_dirichlet_basis(&prod, &patch, k, &opts),
                )?
            } else if let Some(v) = &a.potential {
                let prod = product_pair(&om, &on, false)?;
                let pot = Potential::load(v)?;
                m.path("potential", v);
                cached(
                    ctx.cache.as_ref(),
                    || {
                        let mut k2 = key();
                        k2.push_str("potential").push_str(&pot.to_text());
                        k2
                    },
                    || hamiltonian_basis(&prod, &pot, k, &opts),
                )?
            } else {
                let prod = product_pair(&om, &on, true)?;
                cached(ctx.cache.as_ref(), key, || {
                    eigs_smallest_as(&prod, k, &opts, Provenance::ProductSeparable)
                })?
            }
        }
    };
    record_solver(&mut m, k, &opts);
    basis.save(&a.out, &m.0)
}

/// Rows with no positive value stay unmatched; ties go to the smallest index.
fn positive_argmax(f: &ProductFunction) -> PointMap {
    let (m, n) = f.dims();
    let targets = (0..m)
        .map(|x| {
            let mut best: Option<(usize, f64)> = None;
            for y in 0..n {
                let v = f.get(x, y);
                if v > 0.0 && best.is_none_or(|b| v > b.1) {
                    best = Some((y, v));
                }
            }
            best.map(|b| b.0)
        })
        .collect();
    PointMap::new(targets, n).expect("indices in range")
}

fn load_basis_for(path: Option<&PathBuf>, n: usize, what: &str) -> Result<EigenBasis> {
    let p = path.ok_or_else(|| Error::InvalidArgument(format!("functional maps need --basis-{what}")))?;
    let b = EigenBasis::load(p)?;
    if b.dim() != n {
        return Err(Error::dims("basis dimension", n, b.dim()));
    }
    Ok(b)
}

fn map_convert(a: &MapConvertArgs) -> Result<()> {
    let sm = Shape::load(&a.mesh_m)?;
    let sn = Shape::load(&a.mesh_n)?;
    let (om, on) = (sm.assemble(), sn.assemble());
    let (nm, nn) = (sm.len(), sn.len());
    let lumped_n = on.lumped_masses();
    let mut man = Manifest::new("map-convert");
    man.path("input", &a.input)
        .add("from", format!("{:?}", a.from).to_lowercase())
        .add("to", format!("{:?}", a.to).to_lowercase());

    let needs_bases = a.from == MapFormat::Fmap || a.to == MapFormat::Fmap;
    let bases = if needs_bases {
        Some((load_basis_for(a.basis_m.as_ref(), nm, "m")?, load_basis_for(a.basis_n.as_ref(), nn, "n")?))
    } else {
        None
    };

    // everything goes through a grid function
    let grid: ProductFunction = match a.from {
        MapFormat::Pointmap => {
            let pm = PointMap::load(&a.input, nn)?;
            if pm.len() != nm {
                return Err(Error::dims("point map rows", nm, pm.len()));
            }
            if a.to == MapFormat::Pointmap {
                pm.save(&a.out)?;
                return man.write_for(&a.out);
            }
            density_from_pointmap(&pm, &lumped_n)?.to_function()
        }
        MapFormat::Density => {
            let d = MapDensity::load(&a.input)?;
            if d.grid() != (nm, nn) {
                return Err(Error::dims("density grid", nm * nn, d.grid().0 * d.grid().1));
            }
            d.to_function()
        }
        MapFormat::Fmap => {
            let c = FunctionalMapMatrix::load(&a.input)?;
            let (bm, bn) = bases.as_ref().expect("loaded above");
            if c.basis_hashes() != (basis_hash(bm).as_str(), basis_hash(bn).as_str()) {
                return Err(Error::InvalidArgument("functional map was computed in different bases".into()));
            }
            let (km, kn) = c.dims();
            if km > bm.len() || kn > bn.len() {
                return Err(Error::dims("functional map size", bm.len() * bn.len(), km * kn));
            }
            let phi = bm.truncated(km).full_vectors();
            let psi = bn.truncated(kn).full_vectors();
            let f: Mat<f64> = &phi * c.matrix() * psi.transpose();
            ProductFunction::new(f)
        }
    };

    match a.to {
        MapFormat::Pointmap => positive_argmax(&grid).save(&a.out)?,
        MapFormat::Density => {
            let (g, clamped) = clamp_negative(&grid);
            if clamped > 0.0 {
                man.add("clamped_fraction", clamped);
            }
            MapDensity::from_function(&g).save(&a.out)?
        }
        MapFormat::Fmap => {
            let (bm, bn) = bases.as_ref().expect("loaded above");
            let (g, _) = clamp_negative(&grid);
            let mu = MapDensity::from_function(&g);
            let mut c = fmap_from_density(&mu, bm, bn, &om, &on)?;
            if let Some(t) = a.truncation {
                let scheme = match t {
                    TruncationArg::Rect => Truncation::Rectangular,
                    TruncationArg::ProductOrdered => Truncation::ProductOrdered,
                };
                let k = a.k.unwrap_or(bm.len() * bn.len());
                let pairs = truncation_index_sets(bm.eigenvalues(), bn.eigenvalues(), k, scheme)?;
                // the full block already is the rectangular section
                if scheme == Truncation::ProductOrdered {
                    c = c.restricted_to(&pairs)?;
                }
                man.add("truncation", scheme.name()).add("k", k);
            }
            c.save(&a.out)?
        }
    }
    man.write_for(&a.out)
}

fn band(ctx: &Ctx, a: &BandArgs) -> Result<()> {
    let sm = Shape::load(&a.mesh_m)?;
    let sn = Shape::load(&a.mesh_n)?;
    let prod = product_pair(&sm.assemble(), &sn.assemble(), false)?;
    let seeds = PointMap::load(&a.seeds, sn.len())?;
    if seeds.len() != sm.len() {
        return Err(Error::dims("seed map rows", sm.len(), seeds.len()));
    }
    let size = match (a.radius.or(ctx.file.band.radius), a.area_fraction.or(ctx.file.band.area_fraction)) {
        (Some(r), None) => BandSize::Radius(r),
        (None, Some(f)) => BandSize::AreaFraction(f),
        (Some(r), Some(_)) if a.radius.is_some() => BandSize::Radius(r),
        (Some(_), Some(f)) => BandSize::AreaFraction(f),
        (None, None) => return Err(Error::InvalidArgument("give --radius or --area-fraction".into())),
    };
    let (patch, r) = band_patch(&seeds_of(&seeds), &sm, &sn, &prod, size)?;
    patch.save(&a.out)?;
    let mut m = Manifest::new("band");
    m.path("mesh_m", &a.mesh_m).path("mesh_n", &a.mesh_n).path("seeds", &a.seeds);
    match size {
        BandSize::Radius(r) => m.add("radius", r),
        BandSize::AreaFraction(f) => m.add("area_fraction_target", f),
    };
    m.add("radius_used", r).add("area_fraction", patch.area_fraction()).add("vertices", patch.len());
    m.write_for(&a.out)
}

fn refine_cmd(ctx: &Ctx, a: &RefineArgs) -> Result<()> {
    let sm = Shape::load(&a.mesh_m)?;
    let sn = Shape::load(&a.mesh_n)?;
    let (nm, nn) = (sm.len(), sn.len());
    let initial = match a.initial_format {
        InitialFormat::Pointmap => {
            let pm = PointMap::load(&a.initial, nn)?;
            if pm.len() != nm {
                return Err(Error::dims("initial map rows", nm, pm.len()));
            }
            Initial::Map(pm)
        }
        InitialFormat::Density => Initial::Density(MapDensity::load(&a.initial)?),
    };
    let gt = match &a.gt {
        Some(p) => Some(PointMap::load(p, nn)?),
        None => None,
    };
    let f = &ctx.file.refine;
    let d = RefineConfig::for_shapes(&sm, &sn)?;
    let mut cfg = RefineConfig {
        t_max: a.t_max.or(f.t_max).unwrap_or(d.t_max),
        t_min: a.t_min.or(f.t_min).unwrap_or(d.t_min),
        iterations: a.iterations.or(f.iterations).unwrap_or(d.iterations),
        k: a.k.or(f.k).unwrap_or(d.k),
        tau: a.tau.or(f.tau).unwrap_or(d.tau),
        min_candidates: a.min_candidates.or(f.min_candidates).unwrap_or(d.min_candidates),
        initial_band: if a.full_start { None } else { a.initial_band.or(f.initial_band).or(d.initial_band) },
        initial_patch: None,
        eigs: ctx.eigs_options(&a.solver),
    };
    let mut m = Manifest::new("refine");
    m.path("mesh_m", &a.mesh_m).path("mesh_n", &a.mesh_n).path("initial", &a.initial);
    if let Some(p) = &a.patch {
        let prod = product_pair(&sm.assemble(), &sn.assemble(), false)?;
        cfg.initial_patch = Some(Patch::load(p, &prod)?);
        m.path("patch", p);
    }
    m.add("t_max", cfg.t_max)
        .add("t_min", cfg.t_min)
        .add("iterations", cfg.iterations)
        .add("k", cfg.k)
        .add("tau", cfg.tau)
        .add("min_candidates", cfg.min_candidates)
        .add("initial_band", cfg.initial_band.map_or("none".into(), |b| b.to_string()))
        .add("tol", cfg.eigs.tol)
        .add("seed", cfg.eigs.seed);
    let (pm, trace) = refine(&initial, &sm, &sn, &cfg, gt.as_ref())?;
    pm.save(&a.out)?;
    m.add("iterations_run", trace.records.len())
        .add("converged_early", trace.converged_early)
        .add("filled_rows", trace.filled_rows.len());
    m.write_for(&a.out)?;
    if let Some(t) = &a.trace {
        trace.save(t)?;
        m.write_for(t)?;
    }
    Ok(())
}

fn eval(ctx: &Ctx, a: &EvalArgs) -> Result<()> {
    let sn = Shape::load(&a.mesh_n)?;
    let pm = PointMap::load(&a.map, sn.len())?;
    let gt = PointMap::load(&a.gt, sn.len())?;
    let max = a.max_threshold.or(ctx.file.eval.max_threshold).unwrap_or(DEFAULT_MAX_THRESHOLD);
    let count = a.count.or(ctx.file.eval.count).unwrap_or(DEFAULT_COUNT);
    if !(max >= 0.0) || count == 0 {
        return Err(Error::InvalidArgument("need --max-threshold >= 0 and --count >= 1".into()));
    }
    let curve = geodesic_error_curve(&pm, &gt, &sn, &thresholds(max, count))?;
    curve.save(&a.out)?;
    let mut m = Manifest::new("eval");
    m.path("map", &a.map)
        .path("gt", &a.gt)
        .path("mesh_n", &a.mesh_n)
        .add("max_threshold", max)
        .add("count", count)
        .add("skipped", curve.skipped)
        .add("normalized_area", curve.normalized_area());
    m.write_for(&a.out)
}

/// Exit code for an error: 2 for bad data, 3 for solver failures.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NotConverged { .. } | Error::Factorization(_) | Error::Refinement(_) => 3,
        _ => 2,
    }
}

fn load_config(path: Option<&Path>) -> Result<FileConfig> {
    let Some(p) = path else { return Ok(FileConfig::default()) };
    let text = crate::io::read_text(p)?;
    toml::from_str(&text).map_err(|e| Error::parse(p.display().to_string(), 0, e.message().to_string()))
}

pub fn execute(cli: &Cli) -> Result<()> {
    let file = load_config(cli.config.as_deref())?;
    let threads = cli.threads.or(file.threads).unwrap_or(1);
    faer::set_global_parallelism(if threads <= 1 { faer::Par::Seq } else { faer::Par::rayon(threads) });
    let cache = match &cli.eigs_cache {
        Some(d) => Some(EigsCache::open(d)?),
        None => None,
    };
    let ctx = Ctx { file, cache };
    match &cli.command {
        Command::Assemble(a) => assemble(a),
        Command::Eigs(a) => eigs(&ctx, a),
        Command::ProductEigs(a) => product_eigs(&ctx, a),
        Command::MapConvert(a) => map_convert(a),
        Command::Band(a) => band(&ctx, a),
        Command::Refine(a) => refine_cmd(&ctx, a),
        Command::Eval(a) => eval(&ctx, a),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .try_init();
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("prodmap: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run(["prodmap", "frobnicate"]), 1);
        assert_eq!(run(["prodmap", "eigs"]), 1);
        assert_eq!(run(["prodmap", "--help"]), 0);
    }

    #[test]
    fn data_errors_exit_two() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("x");
        assert_eq!(run(["prodmap", "assemble", "/nonexistent.poly", "--out", out.to_str().unwrap()]), 2);
    }

    #[test]
    fn solver_errors_exit_three() {
        assert_eq!(exit_code(&Error::Refinement("x".into())), 3);
        assert_eq!(exit_code(&Error::InvalidArgument("x".into())), 2);
    }

    #[test]
    fn config_file_rejects_unknown_keys() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.toml");
        std::fs::write(&p, "[eigs]\ntol = 1e-9\nbogus = 1\n").unwrap();
        assert!(load_config(Some(&p)).is_err());
        std::fs::write(&p, "threads = 1\n[eigs]\ntol = 1e-9\n[refine]\ntau = 0.4\n").unwrap();
        let c = load_config(Some(&p)).unwrap();
        assert_eq!(c.eigs.tol, Some(1e-9));
        assert_eq!(c.refine.tau, Some(0.4));
    }

    #[test]
    fn every_numeric_flag_documents_units() {
        use clap::CommandFactory;
        let cmd = Cli::command();
        for sub in cmd.get_subcommands() {
            for arg in sub.get_arguments() {
                let id = arg.get_id().as_str();
                if ["k", "tol", "seed", "max_cycles", "t_max", "t_min", "iterations", "tau", "radius", "area_fraction", "max_threshold", "count", "factor_k", "min_candidates", "initial_band"]
                    .contains(&id)
                {
                    let help = arg.get_help().map(|h| h.to_string()).unwrap_or_default();
                    assert!(
                        help.contains("unit") || help.contains('(') || help.contains("count") || help.contains("fraction"),
                        "{} --{id}: {help}",
                        sub.get_name()
                    );
                }
            }
        }
    }
}
