//! Sparse linear assignment by successive shortest augmenting paths.
//!
//! The problem is a min-cost flow from a source through rows and columns to a
//! sink with arc costs `U − value`. Each augmentation runs Dijkstra on reduced
//! costs; the flow stops growing once the sink is unreachable, so the result
//! has maximum cardinality and, among those, maximum total value.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::localize::Patch;
use crate::maps::PointMap;
use crate::product::ProductFunction;

/// Result of an assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub map: PointMap,
    /// `Σ u(x, a(x))` over matched rows, including greedy ones.
    pub objective: f64,
    /// Rows without a target.
    pub unmatched: Vec<usize>,
    /// Rows matched by the greedy fallback outside their candidate set.
    pub greedy: Vec<usize>,
}

#[derive(Clone, Copy, PartialEq, PartialOrd)]
struct Dist(f64);

impl Eq for Dist {}

impl Ord for Dist {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Maximum-weight matching of rows to columns along candidate arcs
/// `candidates[row] = [(col, value), ...]`.
///
/// Maximizes the number of matched rows first, then the total value.
/// Duplicate arcs keep their largest value.
pub fn max_weight_matching(n_cols: usize, candidates: &[Vec<(usize, f64)>]) -> Result<(Vec<Option<usize>>, f64)> {
    let n_rows = candidates.len();
    let mut top = f64::NEG_INFINITY;
    let mut arcs: Vec<Vec<(usize, f64)>> = Vec::with_capacity(n_rows);
    for (r, c) in candidates.iter().enumerate() {
        let mut a = c.clone();
        for &(j, v) in &a {
            if j >= n_cols {
                return Err(Error::InvalidArgument(format!("candidate column {j} of row {r} out of range")));
            }
            if !v.is_finite() {
                return Err(Error::InvalidArgument(format!("candidate value of ({r}, {j}) is not finite")));
            }
            top = top.max(v);
        }
        a.sort_by(|x, y| x.0.cmp(&y.0).then(y.1.total_cmp(&x.1)));
        a.dedup_by_key(|e| e.0);
        arcs.push(a);
    }
    // costs U − v are nonnegative, so zero potentials start out feasible
    let cost = |v: f64| top - v;

    let mut row_of: Vec<Option<usize>> = vec![None; n_cols];
    let mut col_of: Vec<Option<usize>> = vec![None; n_rows];
    let mut pot_r = vec![0.0f64; n_rows];
    let mut pot_c = vec![0.0f64; n_cols];
    let mut dist_r = vec![f64::INFINITY; n_rows];
    let mut dist_c = vec![f64::INFINITY; n_cols];
    let mut pred = vec![usize::MAX; n_cols];
    let mut done_r = vec![false; n_rows];
    let mut done_c = vec![false; n_cols];
    loop {
        dist_r.iter_mut().for_each(|d| *d = f64::INFINITY);
        dist_c.iter_mut().for_each(|d| *d = f64::INFINITY);
        done_r.iter_mut().for_each(|d| *d = false);
        done_c.iter_mut().for_each(|d| *d = false);
        // heap entries: (distance, node), rows as `r`, columns as `n_rows + j`
        let mut heap = BinaryHeap::new();
        for r in 0..n_rows {
            if col_of[r].is_none() && !arcs[r].is_empty() {
                dist_r[r] = 0.0;
                heap.push(Reverse((Dist(0.0), r)));
            }
        }
        let mut sink: Option<(usize, f64)> = None;
        while let Some(Reverse((Dist(d), node))) = heap.pop() {
            if let Some((_, ds)) = sink {
                if d > ds {
                    break;
                }
            }
            if node < n_rows {
                let r = node;
                if done_r[r] || d > dist_r[r] {
                    continue;
                }
                done_r[r] = true;
                for &(j, v) in &arcs[r] {
                    if col_of[r] == Some(j) || done_c[j] {
                        continue;
                    }
                    let nd = d + (cost(v) + pot_r[r] - pot_c[j]).max(0.0);
                    if nd < dist_c[j] {
                        dist_c[j] = nd;
                        pred[j] = r;
                        heap.push(Reverse((Dist(nd), n_rows + j)));
                    }
                }
            } else {
                let j = node - n_rows;
                if done_c[j] || d > dist_c[j] {
                    continue;
                }
                done_c[j] = true;
                match row_of[j] {
                    None => {
                        if sink.is_none() {
                            sink = Some((j, d));
                        }
                    }
                    Some(r) => {
                        // matched arcs are tight, so the reverse step is free
                        if d < dist_r[r] {
                            dist_r[r] = d;
                            heap.push(Reverse((Dist(d), r)));
                        }
                    }
                }
            }
        }
        let Some((end, ds)) = sink else { break };
        for r in 0..n_rows {
            pot_r[r] += dist_r[r].min(ds);
        }
        for j in 0..n_cols {
            pot_c[j] += dist_c[j].min(ds);
        }
        let mut j = end;
        loop {
            let r = pred[j];
            let prev = col_of[r];
            col_of[r] = Some(j);
            row_of[j] = Some(r);
            match prev {
                Some(p) => j = p,
                None => break,
            }
        }
    }

    let objective = col_of
        .iter()
        .enumerate()
        .filter_map(|(r, c)| c.map(|j| arcs[r].iter().find(|a| a.0 == j).expect("matched along an arc").1))
        .sum();
    Ok((col_of, objective))
}

/// Injective map maximizing `Σ u(x, a(x))` with candidates limited to the patch.
///
/// When `n_M > n_N` the transposed problem is solved and inverted. Rows whose
/// candidates are all taken get the best free column of their full row of `u`
/// (greedy fallback, reported in [`Assignment::greedy`]).
pub fn sharpen_assignment(u: &ProductFunction, patch: &Patch) -> Result<Assignment> {
    let (m, n) = u.dims();
    if patch.grid() != (m, n) {
        return Err(Error::dims("patch grid", m * n, patch.grid().0 * patch.grid().1));
    }
    let transpose = m > n;
    let (rows, cols) = if transpose { (n, m) } else { (m, n) };
    let mut cand: Vec<Vec<(usize, f64)>> = vec![Vec::new(); rows];
    for &idx in patch.vertices() {
        let (x, y) = (idx % m, idx / m);
        if transpose {
            cand[y].push((x, u.get(x, y)));
        } else {
            cand[x].push((y, u.get(x, y)));
        }
    }
    let (sol, _) = max_weight_matching(cols, &cand)?;
    let mut targets: Vec<Option<usize>> = vec![None; m];
    if transpose {
        for (y, x) in sol.iter().enumerate() {
            if let Some(x) = *x {
                targets[x] = Some(y);
            }
        }
    } else {
        targets = sol;
    }

    let mut taken = vec![false; n];
    for t in targets.iter().flatten() {
        taken[*t] = true;
    }
    let mut greedy = Vec::new();
    for x in 0..m {
        if targets[x].is_some() {
            continue;
        }
        let best = (0..n)
            .filter(|&y| !taken[y])
            .fold(None, |acc: Option<usize>, y| match acc {
                Some(b) if u.get(x, b) >= u.get(x, y) => Some(b),
                _ => Some(y),
            });
        if let Some(y) = best {
            taken[y] = true;
            targets[x] = Some(y);
            greedy.push(x);
        }
    }
    if !greedy.is_empty() {
        log::warn!("{} rows had no free candidate in the patch; matched greedily", greedy.len());
    }
    let objective = targets
        .iter()
        .enumerate()
        .filter_map(|(x, t)| t.map(|y| u.get(x, y)))
        .sum();
    let unmatched = (0..m).filter(|&x| targets[x].is_none()).collect();
    Ok(Assignment {
        map: PointMap::new(targets, n)?,
        objective,
        unmatched,
        greedy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute(values: &[Vec<f64>]) -> f64 {
        fn go(r: usize, used: &mut Vec<bool>, v: &[Vec<f64>]) -> f64 {
            if r == v.len() {
                return 0.0;
            }
            let mut best = f64::NEG_INFINITY;
            for c in 0..used.len() {
                if !used[c] {
                    used[c] = true;
                    best = best.max(v[r][c] + go(r + 1, used, v));
                    used[c] = false;
                }
            }
            best
        }
        go(0, &mut vec![false; values[0].len()], values)
    }

    #[test]
    fn matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for trial in 0..30 {
            let n = 2 + trial % 7;
            let v: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.random_range(0.0..1.0)).collect()).collect();
            let cand: Vec<Vec<(usize, f64)>> = v.iter().map(|r| r.iter().cloned().enumerate().collect()).collect();
            let (sol, obj) = max_weight_matching(n, &cand).unwrap();
            assert!(sol.iter().all(|s| s.is_some()));
            let b = brute(&v);
            assert!((obj - b).abs() <= 1e-9, "{obj} vs {b}");
        }
    }

    fn brute_partial(cand: &[Vec<(usize, f64)>], n_cols: usize) -> (usize, f64) {
        fn go(r: usize, used: &mut Vec<bool>, c: &[Vec<(usize, f64)>]) -> (usize, f64) {
            if r == c.len() {
                return (0, 0.0);
            }
            let mut best = go(r + 1, used, c);
            for &(j, v) in &c[r] {
                if !used[j] {
                    used[j] = true;
                    let (k, w) = go(r + 1, used, c);
                    used[j] = false;
                    if k + 1 > best.0 || (k + 1 == best.0 && w + v > best.1) {
                        best = (k + 1, w + v);
                    }
                }
            }
            best
        }
        go(0, &mut vec![false; n_cols], cand)
    }

    #[test]
    fn sparse_rectangular_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let rows = rng.random_range(1..7);
            let cols = rng.random_range(1..7);
            let cand: Vec<Vec<(usize, f64)>> = (0..rows)
                .map(|_| {
                    let mut row = Vec::new();
                    for j in 0..cols {
                        if rng.random_bool(0.4) {
                            row.push((j, rng.random_range(-1.0..1.0)));
                        }
                    }
                    row
                })
                .collect();
            let (sol, obj) = max_weight_matching(cols, &cand).unwrap();
            let (k, w) = brute_partial(&cand, cols);
            assert_eq!(sol.iter().flatten().count(), k);
            assert!((obj - w).abs() < 1e-9, "{obj} vs {w}");
        }
    }

    #[test]
    fn infeasible_rows_stay_unmatched() {
        // rows 0 and 1 both only want column 0
        let cand = vec![vec![(0, 1.0)], vec![(0, 2.0)], vec![(1, 0.5), (2, 0.25)]];
        let (sol, obj) = max_weight_matching(3, &cand).unwrap();
        assert_eq!(sol, vec![None, Some(0), Some(1)]);
        assert!((obj - 2.5).abs() < 1e-12);
    }

    #[test]
    fn cardinality_before_weight() {
        let cand = vec![vec![(0, 10.0), (1, 0.1)], vec![(0, 0.1)]];
        let (sol, _) = max_weight_matching(2, &cand).unwrap();
        assert_eq!(sol, vec![Some(1), Some(0)]);
    }

    #[test]
    fn rectangular_problems() {
        let cand = vec![vec![(3, 1.0), (1, 0.5)], vec![(3, 0.9), (0, 0.1)]];
        let (sol, obj) = max_weight_matching(5, &cand).unwrap();
        assert_eq!(sol, vec![Some(1), Some(3)]);
        assert!((obj - 1.4).abs() < 1e-12);
    }
}
