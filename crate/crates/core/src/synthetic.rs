//! Synthetic shapes and correspondences, including the generators of the
//! bundled dataset in `data/`.

use std::collections::HashMap;
use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::maps::PointMap;
use crate::mesh::{CurveMesh, TriMesh};

/// Uniform circle of the given radius.
pub fn circle(n: usize, radius: f64) -> Result<CurveMesh> {
    CurveMesh::new(
        (0..n)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / n as f64;
                vec![radius * t.cos(), radius * t.sin()]
            })
            .collect(),
    )
}

/// Samples the closed curve `f: [0, 2π) → ℝ²` at `n` points equally spaced in
/// arc length, starting at `f(0)`.
pub fn arclength_curve(f: impl Fn(f64) -> [f64; 2], n: usize) -> Result<CurveMesh> {
    const DENSE: usize = 20_000;
    let ts: Vec<f64> = (0..DENSE).map(|i| 2.0 * PI * i as f64 / DENSE as f64).collect();
    let pts: Vec<[f64; 2]> = ts.iter().map(|&t| f(t)).collect();
    let mut cum = vec![0.0; DENSE + 1];
    for i in 0..DENSE {
        let (a, b) = (pts[i], pts[(i + 1) % DENSE]);
        cum[i + 1] = cum[i] + (a[0] - b[0]).hypot(a[1] - b[1]);
    }
    let total = cum[DENSE];
    let mut out = Vec::with_capacity(n);
    let mut j = 0;
    for i in 0..n {
        let s = total * i as f64 / n as f64;
        while cum[j + 1] < s {
            j += 1;
        }
        let w = if cum[j + 1] > cum[j] { (s - cum[j]) / (cum[j + 1] - cum[j]) } else { 0.0 };
        let t1 = if j + 1 < DENSE { ts[j + 1] } else { 2.0 * PI };
        let p = f(ts[j] + w * (t1 - ts[j]));
        out.push(vec![p[0], p[1]]);
    }
    CurveMesh::new(out)
}

/// Index offset of the bundled curve correspondence.
pub const CURVE_SHIFT: usize = 37;

/// The bundled curve pair: a three-lobed curve `r = 1 + 0.25 cos 3t` and a
/// lopsided ellipse rescaled to the same length, with ground truth
/// `i ↦ (i + 37) mod n`.
pub fn curve_pair(n: usize) -> Result<(CurveMesh, CurveMesh, PointMap)> {
    let m = arclength_curve(
        |t| {
            let r = 1.0 + 0.25 * (3.0 * t).cos();
            [r * t.cos(), r * t.sin()]
        },
        n,
    )?;
    let raw = arclength_curve(|t| [1.3 * t.cos() + 0.1 * (2.0 * t).cos(), 0.8 * t.sin()], n)?;
    let s = m.total_length() / raw.total_length();
    let nn = CurveMesh::new(raw.vertices().iter().map(|v| vec![s * v[0], s * v[1]]).collect())?;
    let gt = PointMap::from_targets((0..n).map(|i| (i + CURVE_SHIFT) % n).collect(), n)?;
    Ok((m, nn, gt))
}

/// Unit icosphere after `levels` rounds of 4-to-1 subdivision.
pub fn icosphere(levels: usize) -> Result<TriMesh> {
    let g = (1.0 + 5f64.sqrt()) / 2.0;
    let mut v: Vec<[f64; 3]> = vec![
        [-1.0, g, 0.0],
        [1.0, g, 0.0],
        [-1.0, -g, 0.0],
        [1.0, -g, 0.0],
        [0.0, -1.0, g],
        [0.0, 1.0, g],
        [0.0, -1.0, -g],
        [0.0, 1.0, -g],
        [g, 0.0, -1.0],
        [g, 0.0, 1.0],
        [-g, 0.0, -1.0],
        [-g, 0.0, 1.0],
    ];
    let mut f: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    let normalize = |p: [f64; 3]| {
        let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        [p[0] / r, p[1] / r, p[2] / r]
    };
    v.iter_mut().for_each(|p| *p = normalize(*p));
    for _ in 0..levels {
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next = Vec::with_capacity(f.len() * 4);
        for t in &f {
            let mut m = [0; 3];
            for e in 0..3 {
                let (a, b) = (t[e], t[(e + 1) % 3]);
                let key = (a.min(b), a.max(b));
                m[e] = *mid.entry(key).or_insert_with(|| {
                    let (pa, pb) = (v[a], v[b]);
                    v.push(normalize([(pa[0] + pb[0]) / 2.0, (pa[1] + pb[1]) / 2.0, (pa[2] + pb[2]) / 2.0]));
                    v.len() - 1
                });
            }
            next.push([t[0], m[0], m[2]]);
            next.push([t[1], m[1], m[0]]);
            next.push([t[2], m[2], m[1]]);
            next.push([m[0], m[1], m[2]]);
        }
        f = next;
    }
    TriMesh::new(v, f)
}

/// The bundled surface pair: an icosphere with 642 vertices and a mildly
/// bent, vertex-permuted copy, with ground truth from the permutation.
pub fn sphere_pair(seed: u64) -> Result<(TriMesh, TriMesh, PointMap)> {
    let m = icosphere(3)?;
    let n = m.len();
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    // vertex i of M becomes vertex perm[i] of N
    let mut verts = vec![[0.0; 3]; n];
    for (i, p) in m.vertices().iter().enumerate() {
        let bend = 1.0 + 0.08 * p[2] * p[2];
        verts[perm[i]] = [p[0] * bend, p[1] / bend.sqrt(), p[2] * (1.0 - 0.05 * p[0])];
    }
    let faces = m.faces().iter().map(|t| [perm[t[0]], perm[t[1]], perm[t[2]]]).collect();
    let nn = TriMesh::new(verts, faces)?;
    Ok((m, nn, PointMap::from_targets(perm, n)?))
}

/// Keeps the ground truth at every `every`-th source vertex.
pub fn sparse_seeds(gt: &PointMap, every: usize) -> PointMap {
    let every = every.max(1);
    let targets = (0..gt.len())
        .map(|i| if i % every == 0 { gt.target(i) } else { None })
        .collect();
    PointMap::new(targets, gt.n_target()).expect("subset of a valid map")
}

/// Adds `count` random matches at unmatched source vertices, each sent to a
/// random target other than the ground truth one.
pub fn add_mismatches(seeds: &PointMap, gt: &PointMap, count: usize, seed: u64) -> PointMap {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut free: Vec<usize> = (0..seeds.len()).filter(|&i| seeds.target(i).is_none()).collect();
    free.shuffle(&mut rng);
    let mut out = seeds.clone();
    for &x in free.iter().take(count) {
        let n = seeds.n_target();
        let mut y = rng.random_range(0..n);
        while Some(y) == gt.target(x) && n > 1 {
            y = rng.random_range(0..n);
        }
        out.set(x, Some(y));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curves_are_uniform_and_equal_length() {
        let (m, n, gt) = curve_pair(200).unwrap();
        let lm = m.total_length();
        assert!((lm - n.total_length()).abs() < 1e-9 * lm);
        let h = m.edge_lengths();
        let mean = lm / 200.0;
        assert!(h.iter().all(|e| (e - mean).abs() < 1e-3 * mean));
        assert!(gt.is_bijective());
    }

    #[test]
    fn sphere_pair_is_consistent() {
        let (m, n, gt) = sphere_pair(1).unwrap();
        assert_eq!(m.len(), 642);
        assert_eq!(n.len(), 642);
        assert!(gt.is_bijective());
        assert_eq!(m.interior_edge_count(), n.interior_edge_count());
        assert!((m.total_area() - 4.0 * PI).abs() < 0.1);
    }

    #[test]
    fn seeds_and_mismatches() {
        let (_, _, gt) = curve_pair(200).unwrap();
        let s = sparse_seeds(&gt, 10);
        assert_eq!(s.matched_count(), 20);
        let noisy = add_mismatches(&s, &gt, 6, 4);
        assert_eq!(noisy.matched_count(), 26);
        let wrong = noisy.pairs().filter(|&(x, y)| gt.target(x) != Some(y)).count();
        assert_eq!(wrong, 6);
    }
}
