//! Linear finite-element discretization of the Laplace–Beltrami operator.
//!
//! Both assemblers produce a stiffness matrix `W` (positive semidefinite,
//! zero row sums on closed meshes) and a consistent mass matrix `S`, so that
//! the discrete Laplacian is `S⁻¹W` and eigenpairs solve `W x = λ S x`.

use crate::error::{Error, Result};
use crate::sparse::{self, SparseMat, SymAssembler};

use super::{CurveMesh, TriMesh};

/// Stiffness and mass matrices of one manifold (or of a product).
#[derive(Debug, Clone)]
pub struct OperatorPair {
    stiffness: SparseMat,
    mass: SparseMat,
    lumped: bool,
}

impl OperatorPair {
    pub fn new(stiffness: SparseMat, mass: SparseMat, lumped: bool) -> Result<Self> {
        let n = stiffness.nrows();
        for (what, m) in [("stiffness", &stiffness), ("mass", &mass)] {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::dims(what, n, m.nrows().max(m.ncols())));
            }
        }
        Ok(Self {
            stiffness,
            mass,
            lumped,
        })
    }

    pub fn n(&self) -> usize {
        self.stiffness.nrows()
    }

    pub fn stiffness(&self) -> &SparseMat {
        &self.stiffness
    }

    pub fn mass(&self) -> &SparseMat {
        &self.mass
    }

    pub fn is_lumped(&self) -> bool {
        self.lumped
    }

    /// `1ᵀ S 1`: length of a curve, area of a surface.
    pub fn total_mass(&self) -> f64 {
        sparse::row_sums(&self.mass).iter().sum()
    }

    /// Row sums of `S` (the lumped masses `ŝ_ii`).
    pub fn lumped_masses(&self) -> Vec<f64> {
        sparse::row_sums(&self.mass)
    }
}

/// Hat-function FEM on a cycle graph.
pub fn assemble_1d(mesh: &CurveMesh) -> OperatorPair {
    let n = mesh.len();
    let lens = mesh.edge_lengths();
    let mut w = SymAssembler::with_capacity(n, 3 * n);
    let mut s = SymAssembler::with_capacity(n, 3 * n);
    let mut wdiag = vec![0.0; n];
    let mut sdiag = vec![0.0; n];
    for (i, &l) in lens.iter().enumerate() {
        let j = (i + 1) % n;
        w.add(i, j, -1.0 / l);
        s.add(i, j, l / 6.0);
        wdiag[i] += 1.0 / l;
        wdiag[j] += 1.0 / l;
        sdiag[i] += l / 3.0;
        sdiag[j] += l / 3.0;
    }
    for i in 0..n {
        w.add(i, i, wdiag[i]);
        s.add(i, i, sdiag[i]);
    }
    OperatorPair {
        stiffness: w.finish(),
        mass: s.finish(),
        lumped: false,
    }
}

/// Cotangent stiffness and linear-FEM mass on a triangle mesh.
///
/// Off-diagonal stiffness entries are `-(cot α + cot β)/2` on interior edges
/// and `-(cot α)/2` on boundary edges; negative cotangents (obtuse angles) are
/// kept as they are.
pub fn assemble_2d(mesh: &TriMesh) -> OperatorPair {
    let n = mesh.len();
    let v = mesh.vertices();
    let mut w = SymAssembler::with_capacity(n, 7 * n);
    let mut s = SymAssembler::with_capacity(n, 7 * n);
    let mut wdiag = vec![0.0; n];
    let mut sdiag = vec![0.0; n];
    // per-edge accumulation so each off-diagonal value is summed in a fixed
    // order before it is stored once
    let mut edge_w = std::collections::BTreeMap::<(usize, usize), f64>::new();
    let mut edge_s = std::collections::BTreeMap::<(usize, usize), f64>::new();
    for (f, &area) in mesh.faces().iter().zip(mesh.face_areas()) {
        for k in 0..3 {
            let (i, j, o) = (f[k], f[(k + 1) % 3], f[(k + 2) % 3]);
            let key = (i.min(j), i.max(j));
            *edge_w.entry(key).or_insert(0.0) -= 0.5 * cot_at(&v[o], &v[i], &v[j]);
            *edge_s.entry(key).or_insert(0.0) += area / 12.0;
            sdiag[i] += area / 6.0;
        }
    }
    for (&(i, j), &val) in &edge_w {
        w.add(i, j, val);
        wdiag[i] -= val;
        wdiag[j] -= val;
    }
    for (&(i, j), &val) in &edge_s {
        s.add(i, j, val);
    }
    for i in 0..n {
        w.add(i, i, wdiag[i]);
        s.add(i, i, sdiag[i]);
    }
    let negative = edge_w.values().filter(|&&x| x > 0.0).count();
    if negative * 2 > edge_w.len() {
        log::warn!(
            "{negative} of {} cotangent weights are negative (obtuse-dominant mesh)",
            edge_w.len()
        );
    }
    OperatorPair {
        stiffness: w.finish(),
        mass: s.finish(),
        lumped: false,
    }
}

/// Number of edges whose cotangent weight has the "wrong" sign.
pub fn negative_cotangent_weights(op: &OperatorPair) -> usize {
    sparse::entries(op.stiffness().as_ref())
        .filter(|&(r, c, v)| r < c && v > 0.0)
        .count()
}

/// Replaces `S` by `diag(ŝ)`, `ŝ_ii = Σ_j s_ij`. Idempotent.
pub fn lump_mass(op: &OperatorPair) -> OperatorPair {
    if op.lumped {
        return op.clone();
    }
    OperatorPair {
        stiffness: op.stiffness.clone(),
        mass: sparse::diag_matrix(&op.lumped_masses()),
        lumped: true,
    }
}

/// Cotangent of the angle at `apex` in the triangle `(apex, a, b)`.
fn cot_at(apex: &[f64; 3], a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let u = [a[0] - apex[0], a[1] - apex[1], a[2] - apex[2]];
    let w = [b[0] - apex[0], b[1] - apex[1], b[2] - apex[2]];
    let dot = u[0] * w[0] + u[1] * w[1] + u[2] * w[2];
    let cx = u[1] * w[2] - u[2] * w[1];
    let cy = u[2] * w[0] - u[0] * w[2];
    let cz = u[0] * w[1] - u[1] * w[0];
    dot / (cx * cx + cy * cy + cz * cz).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::to_dense;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn uniform_cycle(n: usize, h: f64) -> CurveMesh {
        // regular polygon with edge length h
        let r = h / (2.0 * (std::f64::consts::PI / n as f64).sin());
        let pts = (0..n)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                vec![r * t.cos(), r * t.sin()]
            })
            .collect();
        CurveMesh::new(pts).unwrap()
    }

    #[test]
    fn uniform_cycle_stencils() {
        let h = 0.5;
        let op = assemble_1d(&uniform_cycle(8, h));
        let (w, s) = (to_dense(op.stiffness()), to_dense(op.mass()));
        for i in 0..8 {
            let j = (i + 1) % 8;
            assert!((w[(i, i)] - 2.0 / h).abs() < 1e-12);
            assert!((w[(i, j)] + 1.0 / h).abs() < 1e-12);
            assert!((s[(i, i)] - 2.0 * h / 3.0).abs() < 1e-12);
            assert!((s[(i, j)] - h / 6.0).abs() < 1e-12);
            assert_eq!(w[(i, (i + 3) % 8)], 0.0);
        }
        assert!(!op.is_lumped());
    }

    #[test]
    fn stiffness_kills_constants() {
        let op = assemble_1d(&uniform_cycle(11, 0.3));
        for r in sparse::row_sums(op.stiffness()) {
            assert!(r.abs() <= 1e-12 * 2.0 / 0.3);
        }
    }

    #[test]
    fn total_mass_is_curve_length() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..3 {
            let n = rng.random_range(3..40);
            let pts: Vec<Vec<f64>> = (0..n)
                .map(|i| {
                    let t = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                    let r = 1.0 + 0.3 * rng.random::<f64>();
                    vec![r * t.cos(), r * t.sin(), rng.random::<f64>() * 0.1]
                })
                .collect();
            let c = CurveMesh::new(pts).unwrap();
            let op = assemble_1d(&c);
            assert!((op.total_mass() - c.total_length()).abs() < 1e-12 * c.total_length());
        }
    }

    #[test]
    fn equilateral_triangle_cotangent() {
        let s3 = 3f64.sqrt();
        let m = TriMesh::new(vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.5, s3 / 2.0, 0.0]], vec![[0, 1, 2]]).unwrap();
        let op = assemble_2d(&m);
        let w = to_dense(op.stiffness());
        let expected = 1.0 / (2.0 * s3);
        for (i, j) in [(0, 1), (1, 2), (0, 2)] {
            assert!((w[(i, j)] + expected).abs() < 1e-14, "w[{i},{j}] = {}", w[(i, j)]);
        }
        // boundary-edge mass uses the single incident triangle
        let s = to_dense(op.mass());
        let area = s3 / 4.0;
        assert!((s[(0, 1)] - area / 12.0).abs() < 1e-15);
        assert!((s[(0, 0)] - area / 6.0).abs() < 1e-15);
    }

    #[test]
    fn lumping_row_sums_and_idempotence() {
        let h = 0.25;
        let op = assemble_1d(&uniform_cycle(6, h));
        let l = lump_mass(&op);
        assert!(l.is_lumped());
        for d in sparse::diagonal(l.mass()) {
            assert!((d - h).abs() < 1e-14);
        }
        assert!((l.total_mass() - op.total_mass()).abs() < 1e-14);
        let ll = lump_mass(&l);
        assert_eq!(to_dense(ll.mass()), to_dense(l.mass()));
        assert_eq!(to_dense(ll.stiffness()), to_dense(op.stiffness()));
    }

    #[test]
    fn matrices_are_exactly_symmetric() {
        let op = assemble_1d(&uniform_cycle(5, 1.0));
        assert!(sparse::is_symmetric(op.stiffness()));
        assert!(sparse::is_symmetric(op.mass()));
    }
}
