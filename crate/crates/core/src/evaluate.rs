//! Geodesic error curves and reconstruction errors, with CSV output.

use std::collections::HashMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::maps::{MapDensity, PointMap};
use crate::mesh::{EdgeGraph, Shape};
use crate::product::{ProductBasis, ProductFunction, ProductOperator};

/// Per-vertex normalized geodesic errors of a map against ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicErrors {
    /// `(source vertex, error)` for vertices matched in both maps.
    pub errors: Vec<(usize, f64)>,
    /// Source vertices skipped because one of the maps leaves them unmatched.
    pub skipped: usize,
    /// `√(area of N)`, the length scale errors are divided by.
    pub normalizer: f64,
}

impl GeodesicErrors {
    pub fn mean(&self) -> Option<f64> {
        (!self.errors.is_empty()).then(|| self.errors.iter().map(|e| e.1).sum::<f64>() / self.errors.len() as f64)
    }

    pub fn max(&self) -> Option<f64> {
        self.errors.iter().map(|e| e.1).fold(None, |a, e| Some(a.map_or(e, |a: f64| a.max(e))))
    }

    /// Fraction of evaluated vertices with error at most `t`.
    pub fn fraction_within(&self, t: f64) -> f64 {
        if self.errors.is_empty() {
            return 0.0;
        }
        self.errors.iter().filter(|e| e.1 <= t).count() as f64 / self.errors.len() as f64
    }
}

/// `d_N(pm(x), gt(x)) / √(area of N)` for every source vertex matched by both maps.
pub fn geodesic_errors(pm: &PointMap, gt: &PointMap, shape_n: &Shape) -> Result<GeodesicErrors> {
    if pm.len() != gt.len() {
        return Err(Error::dims("source vertices", gt.len(), pm.len()));
    }
    if pm.n_target() != shape_n.len() || gt.n_target() != shape_n.len() {
        return Err(Error::dims("target vertices", shape_n.len(), pm.n_target()));
    }
    let graph = EdgeGraph::of(shape_n);
    let normalizer = shape_n.measure().sqrt();
    let mut fields: HashMap<usize, Vec<f64>> = HashMap::new();
    let mut errors = Vec::new();
    let mut skipped = 0;
    for x in 0..pm.len() {
        let (Some(a), Some(b)) = (pm.target(x), gt.target(x)) else {
            skipped += 1;
            continue;
        };
        if !fields.contains_key(&b) {
            fields.insert(b, graph.distances_from(&[b])?.distances);
        }
        errors.push((x, fields[&b][a] / normalizer));
    }
    Ok(GeodesicErrors {
        errors,
        skipped,
        normalizer,
    })
}

/// Cumulative error curve: fraction of correct matches per threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorCurve {
    pub thresholds: Vec<f64>,
    pub fractions: Vec<f64>,
    pub skipped: usize,
}

impl ErrorCurve {
    /// Trapezoidal area under the curve divided by the threshold span.
    pub fn normalized_area(&self) -> f64 {
        let t = &self.thresholds;
        if t.len() < 2 || t[t.len() - 1] <= t[0] {
            return self.fractions.first().copied().unwrap_or(0.0);
        }
        let area: f64 = (1..t.len())
            .map(|i| 0.5 * (self.fractions[i] + self.fractions[i - 1]) * (t[i] - t[i - 1]))
            .sum();
        area / (t[t.len() - 1] - t[0])
    }

    /// True when this curve is at least `other` at every shared threshold.
    pub fn dominates(&self, other: &ErrorCurve) -> bool {
        self.thresholds == other.thresholds && self.fractions.iter().zip(&other.fractions).all(|(a, b)| a >= b)
    }

    /// `threshold,fraction` rows after a comment naming the normalization.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["threshold", "fraction"]).map_err(csv_err)?;
        for (t, f) in self.thresholds.iter().zip(&self.fractions) {
            w.write_record([t.to_string(), f.to_string()]).map_err(csv_err)?;
        }
        let body = String::from_utf8(w.into_inner().map_err(|e| Error::InvalidArgument(e.to_string()))?)
            .expect("csv output is utf-8");
        Ok(format!(
            "# geodesic error divided by sqrt(measure of target shape: length or area); {} source vertices skipped\n{body}",
            self.skipped
        ))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        crate::io::write_atomic(path, self.to_csv()?.as_bytes())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::InvalidArgument(format!("csv: {e}"))
}

/// Evenly spaced thresholds `0, step, ..., max`.
pub fn thresholds(max: f64, count: usize) -> Vec<f64> {
    if count < 2 {
        return vec![max];
    }
    (0..count).map(|i| max * i as f64 / (count - 1) as f64).collect()
}

/// Fraction of source vertices with normalized geodesic error at most each threshold.
///
/// Vertices unmatched in either map are skipped and counted.
pub fn geodesic_error_curve(pm: &PointMap, gt: &PointMap, shape_n: &Shape, thresholds: &[f64]) -> Result<ErrorCurve> {
    let e = geodesic_errors(pm, gt, shape_n)?;
    let mut sorted: Vec<f64> = e.errors.iter().map(|x| x.1).collect();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len().max(1) as f64;
    let fractions = thresholds
        .iter()
        .map(|&t| if sorted.is_empty() { 0.0 } else { sorted.partition_point(|&x| x <= t) as f64 / n })
        .collect();
    Ok(ErrorCurve {
        thresholds: thresholds.to_vec(),
        fractions,
        skipped: e.skipped,
    })
}

/// `‖μ − Pμ‖_S / ‖μ‖_S` for the S-orthogonal projection onto the basis span.
pub fn reconstruction_error<B: ProductBasis + ?Sized>(
    mu_true: &MapDensity,
    basis: &B,
    prod: &ProductOperator,
) -> Result<f64> {
    reconstruction_error_of(&mu_true.to_function(), basis, prod)
}

/// As [`reconstruction_error`] for an arbitrary grid function.
pub fn reconstruction_error_of<B: ProductBasis + ?Sized>(
    f: &ProductFunction,
    basis: &B,
    prod: &ProductOperator,
) -> Result<f64> {
    let norm = prod.norm(f)?;
    if norm == 0.0 {
        return Err(Error::InvalidArgument("reconstruction error of a zero density is undefined".into()));
    }
    if basis.is_empty() {
        return Ok(1.0);
    }
    let p = basis.project(prod, f)?;
    Ok(prod.norm(&f.combine(1.0, &p, -1.0)?)? / norm)
}

/// One row of a basis comparison table.
#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionRow {
    pub k: usize,
    pub family: String,
    pub error: f64,
}

/// `k,family,error` rows.
pub fn reconstruction_csv(rows: &[ReconstructionRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["k", "family", "error"]).map_err(csv_err)?;
    for r in rows {
        w.write_record([r.k.to_string(), r.family.clone(), r.error.to_string()])
            .map_err(csv_err)?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| Error::InvalidArgument(e.to_string()))?).expect("utf-8"))
}
