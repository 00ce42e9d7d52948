use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

use super::Shape;

/// Graph-geodesic distances from one source vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceField {
    pub distances: Vec<f64>,
    /// False when some vertex is unreachable (its distance is `f64::INFINITY`).
    pub connected: bool,
}

#[derive(Copy, Clone, PartialEq)]
struct Item(f64, usize);

impl Eq for Item {}

impl Ord for Item {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .0
            .total_cmp(&self.0)
            .then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Item {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Weighted adjacency list of the edge graph.
#[derive(Debug, Clone)]
pub struct EdgeGraph {
    adj: Vec<Vec<(usize, f64)>>,
}

impl EdgeGraph {
    pub fn of(shape: &Shape) -> Self {
        let mut adj = vec![Vec::new(); shape.len()];
        shape.for_each_edge(|a, b, l| {
            adj[a].push((b, l));
            adj[b].push((a, l));
        });
        Self { adj }
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn neighbors(&self, v: usize) -> &[(usize, f64)] {
        &self.adj[v]
    }

    /// Dijkstra from a set of sources, all at distance zero.
    pub fn distances_from(&self, sources: &[usize]) -> Result<DistanceField> {
        let n = self.adj.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut heap = BinaryHeap::new();
        for &s in sources {
            if s >= n {
                return Err(Error::InvalidArgument(format!("source vertex {s} out of range (n = {n})")));
            }
            dist[s] = 0.0;
            heap.push(Item(0.0, s));
        }
        while let Some(Item(d, u)) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            for &(v, l) in &self.adj[u] {
                let nd = d + l;
                if nd < dist[v] {
                    dist[v] = nd;
                    heap.push(Item(nd, v));
                }
            }
        }
        let connected = dist.iter().all(|d| d.is_finite());
        Ok(DistanceField {
            distances: dist,
            connected,
        })
    }
}

/// Shortest-path distance along mesh edges from `source` to every vertex.
pub fn geodesic_distances(shape: &Shape, source: usize) -> Result<DistanceField> {
    let field = EdgeGraph::of(shape).distances_from(&[source])?;
    if !field.connected {
        log::warn!("mesh is disconnected: some vertices are unreachable from {source}");
    }
    Ok(field)
}

/// All-pairs graph distances, row `i` holding distances from vertex `i`.
pub fn distance_matrix(shape: &Shape) -> Result<Vec<Vec<f64>>> {
    let g = EdgeGraph::of(shape);
    (0..shape.len())
        .map(|s| g.distances_from(&[s]).map(|f| f.distances))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{CurveMesh, TriMesh};

    #[test]
    fn square_cycle_opposite_vertex() {
        let c = CurveMesh::parse("0 0\n1 0\n1 1\n0 1\n", "sq").unwrap();
        let f = geodesic_distances(&Shape::Curve(c), 0).unwrap();
        assert_eq!(f.distances, vec![0.0, 1.0, 2.0, 1.0]);
        assert!(f.connected);
    }

    #[test]
    fn disconnected_mesh_reports_infinity() {
        let off = "OFF\n6 2 0\n0 0 0\n1 0 0\n0 1 0\n5 0 0\n6 0 0\n5 1 0\n3 0 1 2\n3 3 4 5\n";
        let m = TriMesh::parse_off(off, "two").unwrap();
        let f = geodesic_distances(&Shape::Tri(m), 0).unwrap();
        assert!(!f.connected);
        assert!(f.distances[4].is_infinite());
        assert_eq!(f.distances[0], 0.0);
    }

    #[test]
    fn out_of_range_source() {
        let c = CurveMesh::parse("0 0\n1 0\n1 1\n", "t").unwrap();
        assert!(geodesic_distances(&Shape::Curve(c), 3).is_err());
    }
}
