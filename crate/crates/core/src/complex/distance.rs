//! Shortest-path distances along the 1-skeleton.
//!
//! The graph metric is the edge graph with per-edge lengths, optionally
//! refined one level by edge midpoints (midpoints of the edges of each top
//! simplex are interconnected at their realized Euclidean distances).
//! Distances to simplex barycenters are derived through pendant edges:
//! d(x, bary) = min over vertices v of the simplex of d(x, v) + |v - bary|.

use super::FlatComplex;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

#[derive(Clone, Copy, Debug)]
pub struct DistanceOptions {
    /// One-level edge-midpoint Steiner refinement.
    pub steiner_midpoints: bool,
    /// Stop expanding past this radius; unreached nodes report +inf.
    pub truncate_at: Option<f64>,
}

impl Default for DistanceOptions {
    fn default() -> Self {
        DistanceOptions { steiner_midpoints: false, truncate_at: None }
    }
}

struct HeapEntry {
    dist: f64,
    node: usize,
    label: usize,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    // min-heap by distance, ties by node then label for determinism
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
            .then_with(|| other.label.cmp(&self.label))
    }
}

/// Result of a multi-source run: per-vertex distance and the index (into
/// the source list) of the nearest source, ties to the lower index.
#[derive(Clone, Debug)]
pub struct DistanceField {
    pub dist: Vec<f64>,
    pub nearest: Vec<usize>,
    pub unreachable: usize,
}

impl FlatComplex {
    /// Multi-source shortest-path distances from `sources` (vertex ids).
    pub fn vertex_distances(&self, sources: &[usize], opts: DistanceOptions) -> DistanceField {
        assert!(!sources.is_empty(), "source set must be nonempty");
        let (adj, nodes) = if opts.steiner_midpoints {
            (self.steiner_graph(), self.vertex_count() + self.edge_count())
        } else {
            (self.vertex_adj().to_vec(), self.vertex_count())
        };
        let mut dist = vec![f64::INFINITY; nodes];
        let mut nearest = vec![usize::MAX; nodes];
        let mut done = vec![false; nodes];
        let mut heap = BinaryHeap::new();
        for (label, &s) in sources.iter().enumerate() {
            if dist[s] > 0.0 || (dist[s] == 0.0 && label < nearest[s]) {
                dist[s] = 0.0;
                nearest[s] = nearest[s].min(label);
            }
            heap.push(HeapEntry { dist: 0.0, node: s, label: nearest[s] });
        }
        while let Some(HeapEntry { dist: d, node, label }) = heap.pop() {
            if done[node] {
                continue;
            }
            done[node] = true;
            dist[node] = d;
            nearest[node] = label;
            if let Some(r) = opts.truncate_at {
                if d > r {
                    continue;
                }
            }
            for &(next, len) in &adj[node] {
                if done[next] {
                    continue;
                }
                let nd = d + len;
                if nd < dist[next] || (nd == dist[next] && label < nearest[next]) {
                    dist[next] = nd;
                    nearest[next] = label;
                    heap.push(HeapEntry { dist: nd, node: next, label });
                }
            }
        }
        dist.truncate(self.vertex_count());
        nearest.truncate(self.vertex_count());
        let unreachable = dist.iter().filter(|d| !d.is_finite()).count();
        DistanceField { dist, nearest, unreachable }
    }

    /// Distance from the source set to the barycenter of top `t`.
    pub fn bary_distance(&self, field: &DistanceField, t: usize) -> f64 {
        let top = self.top(t);
        let mut best = f64::INFINITY;
        for (local, &v) in top.iter().enumerate() {
            let d = field.dist[v] + self.bary_pendant(t, local);
            if d < best {
                best = d;
            }
        }
        best
    }

    /// Nearest source label seen from the barycenter of top `t`, with the
    /// pendant distances; ties resolve to the lower label.
    pub fn bary_nearest(&self, field: &DistanceField, t: usize) -> (f64, usize) {
        let top = self.top(t);
        let mut best = f64::INFINITY;
        let mut label = usize::MAX;
        for (local, &v) in top.iter().enumerate() {
            if !field.dist[v].is_finite() {
                continue;
            }
            let d = field.dist[v] + self.bary_pendant(t, local);
            if d < best || (d == best && field.nearest[v] < label) {
                best = d;
                label = field.nearest[v];
            }
        }
        (best, label)
    }

    /// Distance from the source set to the barycenter of facet `f`,
    /// through the facet's own vertices.
    pub fn facet_bary_distance(&self, field: &DistanceField, f: usize) -> f64 {
        let verts = self.facet(f);
        let t = self.facet_cofaces(f).next().expect("facet has a coface");
        let top = self.top(t);
        let pts = self.realization(t);
        let mut bary = [0.0f64; 3];
        let mut locals = Vec::with_capacity(verts.len());
        for &v in verts {
            let local = top.iter().position(|&w| w == v).unwrap();
            locals.push(local);
            bary = crate::geom::add(bary, pts[local]);
        }
        bary = crate::geom::scale(bary, 1.0 / verts.len() as f64);
        let mut best = f64::INFINITY;
        for (&v, &local) in verts.iter().zip(&locals) {
            let d = field.dist[v] + crate::geom::distance(pts[local], bary);
            if d < best {
                best = d;
            }
        }
        best
    }

    /// Adjacency of the midpoint-refined graph. Nodes 0..V are vertices,
    /// V..V+E are edge midpoints. Half-edges connect endpoints to their
    /// midpoint; midpoints of the same top simplex are interconnected and
    /// connected to the opposite vertices at realized distances.
    fn steiner_graph(&self) -> Vec<Vec<(usize, f64)>> {
        let v = self.vertex_count();
        let mut adj = vec![Vec::new(); v + self.edge_count()];
        for e in 0..self.edge_count() {
            let [a, b] = self.edge(e);
            let half = 0.5 * self.edge_length(a, b).unwrap();
            let m = v + e;
            adj[a].push((m, half));
            adj[m].push((a, half));
            adj[b].push((m, half));
            adj[m].push((b, half));
        }
        for t in 0..self.top_count() {
            let top = self.top(t);
            let pts = self.realization(t);
            let k = top.len();
            let mut mids = Vec::new();
            for i in 0..k {
                for j in (i + 1)..k {
                    let e = self.edge_id(top[i], top[j]).unwrap();
                    let mid = crate::geom::scale(crate::geom::add(pts[i], pts[j]), 0.5);
                    mids.push((v + e, mid, [i, j]));
                }
            }
            for a in 0..mids.len() {
                for b in (a + 1)..mids.len() {
                    let d = crate::geom::distance(mids[a].1, mids[b].1);
                    adj[mids[a].0].push((mids[b].0, d));
                    adj[mids[b].0].push((mids[a].0, d));
                }
                // midpoint to the vertices not on its edge
                for (i, &pv) in top.iter().enumerate() {
                    if i != mids[a].2[0] && i != mids[a].2[1] {
                        let d = crate::geom::distance(mids[a].1, pts[i]);
                        adj[mids[a].0].push((pv, d));
                        adj[pv].push((mids[a].0, d));
                    }
                }
            }
        }
        for lst in &mut adj {
            lst.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.total_cmp(&y.1)));
        }
        adj
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::flat_torus_2d;

    #[test]
    fn torus_neighbors_at_grid_distance() {
        let k = flat_torus_2d(8).unwrap();
        let field = k.vertex_distances(&[0], DistanceOptions::default());
        assert_eq!(field.unreachable, 0);
        assert!((field.dist[0] - 0.0).abs() == 0.0);
        // the 4 axis neighbors of vertex (0,0) on the 8x8 grid
        let h = 1.0 / 8.0;
        for v in [1, 7, 8, 56] {
            assert!(
                (field.dist[v] - h).abs() < 1e-12,
                "vertex {v} at {}",
                field.dist[v]
            );
        }
    }

    #[test]
    fn all_sources_zero() {
        let k = flat_torus_2d(4).unwrap();
        let sources: Vec<usize> = (0..k.vertex_count()).collect();
        let field = k.vertex_distances(&sources, DistanceOptions::default());
        assert!(field.dist.iter().all(|&d| d == 0.0));
    }

    #[test]
    fn path_of_three_unit_edges() {
        // strip of triangles realizing a 3-edge path along the bottom
        let k = FlatComplex::from_edge_lengths(
            2,
            5,
            vec![vec![0, 1, 4], vec![1, 2, 4], vec![2, 3, 4]],
            vec![
                (0, 1, 1.0),
                (1, 2, 1.0),
                (2, 3, 1.0),
                (0, 4, 1.5),
                (1, 4, 1.0),
                (2, 4, 1.0),
                (3, 4, 1.5),
            ],
        )
        .unwrap();
        let field = k.vertex_distances(&[0], DistanceOptions::default());
        assert!((field.dist[3] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn steiner_refinement_never_increases_distances() {
        let k = flat_torus_2d(6).unwrap();
        let plain = k.vertex_distances(&[0], DistanceOptions::default());
        let refined = k.vertex_distances(
            &[0],
            DistanceOptions { steiner_midpoints: true, truncate_at: None },
        );
        for v in 0..k.vertex_count() {
            assert!(refined.dist[v] <= plain.dist[v] + 1e-12);
        }
    }

    #[test]
    fn triangle_inequality_on_samples() {
        let k = flat_torus_2d(5).unwrap();
        let from0 = k.vertex_distances(&[0], DistanceOptions::default());
        let from7 = k.vertex_distances(&[7], DistanceOptions::default());
        let d07 = from0.dist[7];
        for v in 0..k.vertex_count() {
            assert!(from0.dist[v] <= d07 + from7.dist[v] + 1e-12);
        }
    }
}
