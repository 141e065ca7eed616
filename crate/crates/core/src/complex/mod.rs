//! Piecewise-flat simplicial complexes of dimension 2 or 3.
//!
//! Geometry is intrinsic: the input is a set of top simplices plus one
//! length per edge. Each top simplex gets its own local Euclidean
//! realization from the lengths; no global embedding is ever computed.

mod chain;
mod distance;
mod io;
pub mod realize;
mod refine;
mod slice;
mod width;

pub use chain::{simplex_set_boundary, Chain};
pub use distance::{DistanceField, DistanceOptions};
pub use refine::{
    below_volume, cut_complex_along, cut_simplex, piece_volume, triangulate_cell,
    triangulate_polygon, CutComplex, CutPiece, CutResult, CutVertex, DerivedComplex, FaceTag,
    Host,
};
pub use slice::{slice_simplex, simplex_profile, LocalPoly};
pub use width::{PlMorse, WidthProfile};

/// Maximum level-set volume of the linear extension of `values`
/// restricted to the given top simplices.
pub fn width_over_tops(complex: &FlatComplex, values: &[f64], tops: &[usize]) -> f64 {
    width::width_over_tops(complex, values, tops)
}

/// Nudge `t` away from the given values (regular-value snapping) without
/// constructing a PL Morse function first.
pub fn snap_values_regular(values: &[f64], t: f64) -> (f64, bool) {
    width::snap_regular(values, t)
}

use crate::geom::{self, KahanSum, Point3};
use crate::{Error, Result};
use std::collections::HashMap;

pub const NONE: usize = usize::MAX;

/// A piecewise-flat simplicial n-complex, n in {2, 3}.
///
/// Every (n-1)-face is incident to one or two top simplices; faces shared
/// by adjacent simplices are isometric by construction since lengths are
/// keyed on global vertex pairs.
#[derive(Clone, Debug)]
pub struct FlatComplex {
    dim: usize,
    vertex_count: usize,
    tops: Vec<[usize; 4]>,
    edges: Vec<[usize; 2]>,
    edge_lengths: Vec<f64>,
    edge_index: HashMap<[usize; 2], usize>,
    facets: Vec<[usize; 3]>,
    facet_index: HashMap<[usize; 3], usize>,
    facet_cofaces: Vec<[usize; 2]>,
    facet_volumes: Vec<f64>,
    boundary_facets: Vec<usize>,
    top_facets: Vec<[usize; 4]>,
    realizations: Vec<Vec<Point3>>,
    top_volumes: Vec<f64>,
    bary_pendants: Vec<[f64; 4]>,
    volume: f64,
    vertex_adj: Vec<Vec<(usize, f64)>>,
}

impl FlatComplex {
    /// Build a complex from per-edge lengths. `tops` lists the vertex ids of
    /// each top simplex; `edges` must cover every 1-face of every top.
    pub fn from_edge_lengths(
        dim: usize,
        vertex_count: usize,
        tops: Vec<Vec<usize>>,
        edges: Vec<(usize, usize, f64)>,
    ) -> Result<Self> {
        check_dim(dim)?;
        let mut edge_index = HashMap::new();
        let mut edge_list = Vec::new();
        let mut edge_lengths = Vec::new();
        for (u, v, len) in edges {
            if u == v || u >= vertex_count || v >= vertex_count {
                return Err(Error::Parse {
                    line: 0,
                    message: format!("bad edge ({u}, {v})"),
                });
            }
            if !(len > 0.0) || !len.is_finite() {
                return Err(Error::Parse {
                    line: 0,
                    message: format!("edge ({u}, {v}) has non-positive length {len}"),
                });
            }
            let key = [u.min(v), u.max(v)];
            if edge_index.contains_key(&key) {
                return Err(Error::Parse {
                    line: 0,
                    message: format!("duplicate edge ({u}, {v})"),
                });
            }
            edge_index.insert(key, edge_list.len());
            edge_list.push(key);
            edge_lengths.push(len);
        }
        let tops = canonical_tops(dim, vertex_count, tops)?;
        // Realize every top simplex from the lengths.
        let mut realizations = Vec::with_capacity(tops.len());
        for (ti, top) in tops.iter().enumerate() {
            let mut lens = [[0.0f64; 4]; 4];
            for i in 0..=dim {
                for j in (i + 1)..=dim {
                    let key = [top[i].min(top[j]), top[i].max(top[j])];
                    let Some(&eid) = edge_index.get(&key) else {
                        return Err(Error::Parse {
                            line: 0,
                            message: format!(
                                "missing edge ({}, {}) of simplex {ti}",
                                key[0], key[1]
                            ),
                        });
                    };
                    lens[i][j] = edge_lengths[eid];
                    lens[j][i] = edge_lengths[eid];
                }
            }
            let points = realize::realize_simplex(&lens, dim)
                .ok_or(Error::DegenerateSimplex { simplex: ti })?;
            realizations.push(points);
        }
        Self::assemble(dim, vertex_count, tops, edge_list, edge_lengths, edge_index, realizations)
    }

    /// Build a complex from explicit vertex coordinates (any ambient
    /// dimension up to 3); edge lengths are derived from the embedding.
    pub fn from_embedded(dim: usize, coords: Vec<Point3>, tops: Vec<Vec<usize>>) -> Result<Self> {
        check_dim(dim)?;
        let vertex_count = coords.len();
        let canonical = canonical_tops(dim, vertex_count, tops)?;
        let mut edges: HashMap<[usize; 2], f64> = HashMap::new();
        for top in &canonical {
            for i in 0..=dim {
                for j in (i + 1)..=dim {
                    let key = [top[i], top[j]];
                    edges
                        .entry(key)
                        .or_insert_with(|| geom::distance(coords[key[0]], coords[key[1]]));
                }
            }
        }
        let mut edge_vec: Vec<(usize, usize, f64)> =
            edges.into_iter().map(|(k, l)| (k[0], k[1], l)).collect();
        edge_vec.sort_by_key(|&(u, v, _)| (u, v));
        Self::from_edge_lengths(
            dim,
            vertex_count,
            canonical.iter().map(|t| t[..=dim].to_vec()).collect(),
            edge_vec,
        )
    }

    /// Build a complex whose per-top realizations are already known (used
    /// for refined complexes produced by cutting). Edge lengths are taken
    /// from the realization of the first top that contains each edge; no
    /// Cayley-Menger re-embedding happens.
    pub(crate) fn from_realized(
        dim: usize,
        vertex_count: usize,
        tops: Vec<(Vec<usize>, Vec<Point3>)>,
    ) -> Result<Self> {
        check_dim(dim)?;
        let mut tuples = Vec::with_capacity(tops.len());
        let mut realizations = Vec::with_capacity(tops.len());
        let mut edge_index: HashMap<[usize; 2], usize> = HashMap::new();
        let mut edge_list = Vec::new();
        let mut edge_lengths = Vec::new();
        for (verts, points) in &tops {
            // Sort vertices and carry the points along.
            let mut order: Vec<usize> = (0..verts.len()).collect();
            order.sort_by_key(|&i| verts[i]);
            let sorted: Vec<usize> = order.iter().map(|&i| verts[i]).collect();
            let sorted_pts: Vec<Point3> = order.iter().map(|&i| points[i]).collect();
            for i in 0..=dim {
                for j in (i + 1)..=dim {
                    let key = [sorted[i], sorted[j]];
                    if !edge_index.contains_key(&key) {
                        edge_index.insert(key, edge_list.len());
                        edge_list.push(key);
                        edge_lengths.push(geom::distance(sorted_pts[i], sorted_pts[j]));
                    }
                }
            }
            tuples.push(sorted);
            realizations.push(sorted_pts);
        }
        let canonical = canonical_tops(dim, vertex_count, tuples)?;
        Self::assemble(dim, vertex_count, canonical, edge_list, edge_lengths, edge_index, realizations)
    }

    fn assemble(
        dim: usize,
        vertex_count: usize,
        tops: Vec<[usize; 4]>,
        edges: Vec<[usize; 2]>,
        edge_lengths: Vec<f64>,
        edge_index: HashMap<[usize; 2], usize>,
        realizations: Vec<Vec<Point3>>,
    ) -> Result<Self> {
        // Face lattice: collect (n-1)-faces with their cofaces.
        let mut facet_index: HashMap<[usize; 3], usize> = HashMap::new();
        let mut facets: Vec<[usize; 3]> = Vec::new();
        let mut facet_cofaces: Vec<[usize; 2]> = Vec::new();
        let mut top_facets = vec![[NONE; 4]; tops.len()];
        for (ti, top) in tops.iter().enumerate() {
            for omit in 0..=dim {
                let mut f = [NONE; 3];
                let mut k = 0;
                for (i, &v) in top[..=dim].iter().enumerate() {
                    if i != omit {
                        f[k] = v;
                        k += 1;
                    }
                }
                let fid = *facet_index.entry(f).or_insert_with(|| {
                    facets.push(f);
                    facet_cofaces.push([NONE; 2]);
                    facets.len() - 1
                });
                let slot = &mut facet_cofaces[fid];
                if slot[0] == NONE {
                    slot[0] = ti;
                } else if slot[1] == NONE {
                    slot[1] = ti;
                } else {
                    return Err(Error::NonManifold {
                        face: f.iter().filter(|&&v| v != NONE).copied().collect(),
                        count: 3,
                    });
                }
                top_facets[ti][omit] = fid;
            }
        }
        let boundary_facets: Vec<usize> = (0..facets.len())
            .filter(|&f| facet_cofaces[f][1] == NONE)
            .collect();
        // Volumes.
        let mut top_volumes = Vec::with_capacity(tops.len());
        let mut volume = KahanSum::new();
        let mut bary_pendants = vec![[0.0f64; 4]; tops.len()];
        for (ti, points) in realizations.iter().enumerate() {
            let v = realize::simplex_volume(points);
            top_volumes.push(v);
            volume.add(v);
            let mut bary = [0.0f64; 3];
            for p in points {
                bary = geom::add(bary, *p);
            }
            bary = geom::scale(bary, 1.0 / points.len() as f64);
            for (i, p) in points.iter().enumerate() {
                bary_pendants[ti][i] = geom::distance(*p, bary);
            }
        }
        // Facet volumes: realized within the first coface.
        let mut facet_volumes = Vec::with_capacity(facets.len());
        for (fi, f) in facets.iter().enumerate() {
            let ti = facet_cofaces[fi][0];
            let top = &tops[ti];
            let pts: Vec<Point3> = f[..dim]
                .iter()
                .map(|&v| {
                    let local = top[..=dim].iter().position(|&w| w == v).unwrap();
                    realizations[ti][local]
                })
                .collect();
            facet_volumes.push(realize::simplex_volume(&pts));
        }
        // 1-skeleton adjacency for shortest paths.
        let mut vertex_adj = vec![Vec::new(); vertex_count];
        for (eid, e) in edges.iter().enumerate() {
            let len = edge_lengths[eid];
            vertex_adj[e[0]].push((e[1], len));
            vertex_adj[e[1]].push((e[0], len));
        }
        for adj in &mut vertex_adj {
            adj.sort_by(|a, b| a.0.cmp(&b.0));
        }
        Ok(Self {
            dim,
            vertex_count,
            tops,
            edges,
            edge_lengths,
            edge_index,
            facets,
            facet_index,
            facet_cofaces,
            facet_volumes,
            boundary_facets,
            top_facets,
            realizations,
            top_volumes,
            bary_pendants,
            volume: volume.value(),
            vertex_adj,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn top_count(&self) -> usize {
        self.tops.len()
    }

    /// Vertex ids of top simplex `t` (sorted, length n+1).
    pub fn top(&self, t: usize) -> &[usize] {
        &self.tops[t][..=self.dim]
    }

    pub fn facet_count(&self) -> usize {
        self.facets.len()
    }

    /// Vertex ids of (n-1)-face `f` (sorted, length n).
    pub fn facet(&self, f: usize) -> &[usize] {
        &self.facets[f][..self.dim]
    }

    pub fn facet_id(&self, verts: &[usize]) -> Option<usize> {
        let mut key = [NONE; 3];
        let mut sorted = verts.to_vec();
        sorted.sort_unstable();
        for (i, v) in sorted.iter().enumerate() {
            key[i] = *v;
        }
        self.facet_index.get(&key).copied()
    }

    pub fn facet_cofaces(&self, f: usize) -> impl Iterator<Item = usize> + '_ {
        self.facet_cofaces[f].iter().copied().filter(|&t| t != NONE)
    }

    pub fn facet_volume(&self, f: usize) -> f64 {
        self.facet_volumes[f]
    }

    /// Facet ids of top `t`; entry `i` is the facet opposite local vertex i.
    pub fn top_facet_ids(&self, t: usize) -> &[usize] {
        &self.top_facets[t][..=self.dim]
    }

    pub fn boundary_facets(&self) -> &[usize] {
        &self.boundary_facets
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edge(&self, e: usize) -> [usize; 2] {
        self.edges[e]
    }

    pub fn edge_id(&self, u: usize, v: usize) -> Option<usize> {
        self.edge_index.get(&[u.min(v), u.max(v)]).copied()
    }

    pub fn edge_length(&self, u: usize, v: usize) -> Option<f64> {
        self.edge_id(u, v).map(|e| self.edge_lengths[e])
    }

    pub fn longest_edge(&self) -> f64 {
        self.edge_lengths.iter().copied().fold(0.0, f64::max)
    }

    /// Local Euclidean realization of top `t`, in the order of `top(t)`.
    pub fn realization(&self, t: usize) -> &[Point3] {
        &self.realizations[t]
    }

    pub fn top_volume(&self, t: usize) -> f64 {
        self.top_volumes[t]
    }

    /// Total n-volume.
    pub fn volume(&self) -> f64 {
        self.volume
    }

    /// n-volume of a sub-collection of top simplices (index order, Kahan).
    pub fn volume_of(&self, tops: &[usize]) -> f64 {
        let mut acc = KahanSum::new();
        for &t in tops {
            acc.add(self.top_volumes[t]);
        }
        acc.value()
    }

    /// Distance from realized vertex `local` of top `t` to the barycenter.
    pub fn bary_pendant(&self, t: usize, local: usize) -> f64 {
        self.bary_pendants[t][local]
    }

    pub(crate) fn vertex_adj(&self) -> &[Vec<(usize, f64)>] {
        &self.vertex_adj
    }

    /// Edge-adjacency of top simplices: pairs sharing an interior facet.
    pub fn dual_adjacency(&self, t: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.top_facets[t][..=self.dim].iter().filter_map(move |&f| {
            let [a, b] = self.facet_cofaces[f];
            if b == NONE {
                None
            } else if a == t {
                Some((b, f))
            } else {
                Some((a, f))
            }
        })
    }

    /// Mean of vertex `values` over top `t` (the value of the linear
    /// extension at its barycenter).
    pub fn bary_value(&self, t: usize, values: &[f64]) -> f64 {
        let top = self.top(t);
        top.iter().map(|&v| values[v]).sum::<f64>() / top.len() as f64
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim < 2 || dim > 3 {
        return Err(Error::UnsupportedDimension { dim, min: 2, max: 3 });
    }
    Ok(())
}

fn canonical_tops(
    dim: usize,
    vertex_count: usize,
    tops: Vec<Vec<usize>>,
) -> Result<Vec<[usize; 4]>> {
    let mut out = Vec::with_capacity(tops.len());
    for (ti, t) in tops.iter().enumerate() {
        if t.len() != dim + 1 {
            return Err(Error::Parse {
                line: 0,
                message: format!("simplex {ti} has {} vertices, expected {}", t.len(), dim + 1),
            });
        }
        let mut s = [NONE; 4];
        let mut sorted = t.clone();
        sorted.sort_unstable();
        for w in sorted.windows(2) {
            if w[0] == w[1] {
                return Err(Error::Parse {
                    line: 0,
                    message: format!("simplex {ti} repeats vertex {}", w[0]),
                });
            }
        }
        if sorted[dim] >= vertex_count {
            return Err(Error::Parse {
                line: 0,
                message: format!("simplex {ti} references vertex {}", sorted[dim]),
            });
        }
        for (i, v) in sorted.iter().enumerate() {
            s[i] = *v;
        }
        out.push(s);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn unit_square() -> FlatComplex {
        // Two unit right triangles glued along the diagonal (hypotenuse).
        let s2 = 2.0f64.sqrt();
        FlatComplex::from_edge_lengths(
            2,
            4,
            vec![vec![0, 1, 2], vec![0, 2, 3]],
            vec![
                (0, 1, 1.0),
                (1, 2, 1.0),
                (2, 3, 1.0),
                (0, 3, 1.0),
                (0, 2, s2),
            ],
        )
        .unwrap()
    }

    #[test]
    fn unit_square_area_and_boundary() {
        let k = unit_square();
        assert_eq!(k.vertex_count(), 4);
        assert_eq!(k.top_count(), 2);
        assert!((k.volume() - 1.0).abs() < 1e-12);
        // 4 outer edges on the boundary, diagonal interior.
        assert_eq!(k.boundary_facets().len(), 4);
    }

    #[test]
    fn degenerate_triangle_is_reported() {
        let err = FlatComplex::from_edge_lengths(
            2,
            3,
            vec![vec![0, 1, 2]],
            vec![(0, 1, 1.0), (0, 2, 1.0), (1, 2, 3.0)],
        )
        .unwrap_err();
        match err {
            Error::DegenerateSimplex { simplex } => assert_eq!(simplex, 0),
            other => panic!("expected DegenerateSimplex, got {other}"),
        }
    }

    #[test]
    fn non_manifold_face_detected() {
        // Three triangles sharing the edge (0, 1).
        let err = FlatComplex::from_edge_lengths(
            2,
            5,
            vec![vec![0, 1, 2], vec![0, 1, 3], vec![0, 1, 4]],
            vec![
                (0, 1, 1.0),
                (0, 2, 1.0),
                (1, 2, 1.0),
                (0, 3, 1.0),
                (1, 3, 1.0),
                (0, 4, 1.0),
                (1, 4, 1.0),
            ],
        )
        .unwrap_err();
        assert!(matches!(err, Error::NonManifold { .. }));
    }

    #[test]
    fn right_triangle_area_is_half_product_of_legs() {
        let k = FlatComplex::from_edge_lengths(
            2,
            3,
            vec![vec![0, 1, 2]],
            vec![(0, 1, 3.0), (0, 2, 4.0), (1, 2, 5.0)],
        )
        .unwrap();
        assert!((k.volume() - 6.0).abs() < 1e-9);
    }

    #[test]
    fn realization_roundtrip_on_square() {
        let k = unit_square();
        for t in 0..k.top_count() {
            let top = k.top(t);
            let pts = k.realization(t);
            for i in 0..top.len() {
                for j in (i + 1)..top.len() {
                    let want = k.edge_length(top[i], top[j]).unwrap();
                    let got = crate::geom::distance(pts[i], pts[j]);
                    assert!((got - want).abs() <= 1e-9 * want);
                }
            }
        }
    }
}
