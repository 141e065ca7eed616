//! Cutting simplices and complexes along level sets of PL functions, and
//! the provenance bookkeeping for complexes derived from a root complex.
//!
//! Cutting a simplex by the level set of a linear function produces two
//! convex pieces and a planar cross-section with vertices on the edges.
//! Pieces are triangulated with rules that depend only on global vertex
//! ids (fan from the smallest id), so adjacent simplices cut by the same
//! level produce matching triangulations of their shared faces.

use super::realize::simplex_volume;
use super::{Chain, FlatComplex};
use crate::geom::{self, Point3};
use crate::{Error, Result};
use std::collections::HashMap;
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CutVertex {
    /// Local vertex index of the simplex being cut.
    Original(usize),
    /// Crossing point on the edge between local vertices i < j, at
    /// parameter s from i.
    OnEdge { i: usize, j: usize, s: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FaceTag {
    /// Piece of the facet opposite the given local vertex.
    Facet(usize),
    /// The cross-section.
    Section,
}

#[derive(Clone, Debug)]
pub struct CutPiece {
    pub below: bool,
    /// Faces as cyclic lists of indices into `CutResult::verts`. For n=2
    /// there is a single face: the piece polygon itself.
    pub faces: Vec<(FaceTag, Vec<usize>)>,
}

#[derive(Clone, Debug)]
pub struct CutResult {
    pub verts: Vec<(CutVertex, Point3)>,
    pub below: Option<CutPiece>,
    pub above: Option<CutPiece>,
    /// Indices (into verts) of the cross-section, cyclic for n=3.
    pub section: Vec<usize>,
}

#[derive(Clone, Copy, PartialEq)]
enum Side {
    Below,
    On,
    Above,
}

/// Cut a realized simplex by the level set {f = t} of the linear function
/// with the given vertex values. Vertices within `snap` of the level are
/// treated as lying on it. Returns `None` when the cut is not transversal
/// (no strict straddle): the caller keeps the simplex whole.
pub fn cut_simplex(
    points: &[Point3],
    values: &[f64],
    t: f64,
    snap: f64,
) -> Option<CutResult> {
    let k = points.len() - 1;
    let sides: Vec<Side> = values
        .iter()
        .map(|&v| {
            if (v - t).abs() <= snap {
                Side::On
            } else if v < t {
                Side::Below
            } else {
                Side::Above
            }
        })
        .collect();
    let n_below = sides.iter().filter(|&&s| s == Side::Below).count();
    let n_above = sides.iter().filter(|&&s| s == Side::Above).count();
    if n_below == 0 || n_above == 0 {
        return None;
    }
    let mut verts: Vec<(CutVertex, Point3)> = (0..=k)
        .map(|i| (CutVertex::Original(i), points[i]))
        .collect();
    // crossing per straddling edge
    let mut crossing: HashMap<(usize, usize), usize> = HashMap::new();
    for i in 0..=k {
        for j in (i + 1)..=k {
            let straddle = matches!(
                (sides[i], sides[j]),
                (Side::Below, Side::Above) | (Side::Above, Side::Below)
            );
            if straddle {
                let s = (t - values[i]) / (values[j] - values[i]);
                let p = geom::lerp(points[i], points[j], s);
                crossing.insert((i, j), verts.len());
                verts.push((CutVertex::OnEdge { i, j, s }, p));
            }
        }
    }
    let on_side = |v: usize, below: bool| -> bool {
        sides[v] == Side::On || (sides[v] == Side::Below) == below
    };
    // Piece faces from the original facets. Facet `omit` is walked along
    // the cycle of its vertices in increasing order.
    let build_piece = |below: bool| -> Option<CutPiece> {
        let strict = if below { n_below } else { n_above };
        if strict == 0 {
            return None;
        }
        let mut faces = Vec::new();
        if k == 2 {
            // the piece polygon: walk vertex cycle 0,1,2
            let cyc = [0usize, 1, 2];
            let mut poly = Vec::new();
            for a in 0..3 {
                let v = cyc[a];
                let w = cyc[(a + 1) % 3];
                if on_side(v, below) {
                    poly.push(v);
                }
                if let Some(&c) = crossing.get(&(v.min(w), v.max(w))) {
                    poly.push(c);
                }
            }
            if poly.len() >= 3 {
                faces.push((FaceTag::Section, poly));
            }
        } else {
            for omit in 0..=k {
                let fverts: Vec<usize> = (0..=k).filter(|&v| v != omit).collect();
                let mut poly = Vec::new();
                for a in 0..fverts.len() {
                    let v = fverts[a];
                    let w = fverts[(a + 1) % fverts.len()];
                    if on_side(v, below) {
                        poly.push(v);
                    }
                    if let Some(&c) = crossing.get(&(v.min(w), v.max(w))) {
                        poly.push(c);
                    }
                }
                poly.dedup();
                if poly.len() >= 3 {
                    faces.push((FaceTag::Facet(omit), poly));
                }
            }
        }
        Some(CutPiece { below, faces })
    };
    let mut below_piece = build_piece(true);
    let mut above_piece = build_piece(false);
    // Cross-section: crossings plus ON vertices, ordered.
    let mut section_pts: Vec<usize> = Vec::new();
    for (idx, (cv, _)) in verts.iter().enumerate() {
        match cv {
            CutVertex::Original(v) if sides[*v] == Side::On => section_pts.push(idx),
            CutVertex::OnEdge { .. } => section_pts.push(idx),
            _ => {}
        }
    }
    let section = if k == 2 {
        if section_pts.len() == 2 {
            section_pts
        } else {
            return None; // degenerate: treat as non-transversal
        }
    } else {
        match order_section_cycle(k, &verts, &sides, &crossing, &section_pts) {
            Some(cycle) => cycle,
            None => return None,
        }
    };
    // attach the section polygon to both pieces (n=3)
    if k == 3 && section.len() >= 3 {
        if let Some(p) = below_piece.as_mut() {
            p.faces.push((FaceTag::Section, section.clone()));
        }
        if let Some(p) = above_piece.as_mut() {
            p.faces.push((FaceTag::Section, section.clone()));
        }
    }
    Some(CutResult { verts, below: below_piece, above: above_piece, section })
}

/// Order the cross-section points of a tet cut into a cycle. Each facet
/// with exactly two section points contributes one cycle edge.
fn order_section_cycle(
    k: usize,
    verts: &[(CutVertex, Point3)],
    sides: &[Side],
    crossing: &HashMap<(usize, usize), usize>,
    section_pts: &[usize],
) -> Option<Vec<usize>> {
    if section_pts.len() < 3 {
        return None;
    }
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for omit in 0..=k {
        let fverts: Vec<usize> = (0..=k).filter(|&v| v != omit).collect();
        let mut on_facet = Vec::new();
        for &sp in section_pts {
            let belongs = match verts[sp].0 {
                CutVertex::Original(v) => fverts.contains(&v) && sides[v] == Side::On,
                CutVertex::OnEdge { i, j, .. } => fverts.contains(&i) && fverts.contains(&j),
            };
            if belongs {
                on_facet.push(sp);
            }
        }
        match on_facet.len() {
            0 | 1 => {}
            2 => edges.push((on_facet[0], on_facet[1])),
            _ => return None, // cut coplanar with a facet
        }
        let _ = crossing;
    }
    // trace the cycle
    let mut adj: HashMap<usize, Vec<usize>> = HashMap::new();
    for &(a, b) in &edges {
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default().push(a);
    }
    if adj.len() != section_pts.len() || adj.values().any(|v| v.len() != 2) {
        return None;
    }
    let start = *section_pts.iter().min().unwrap();
    let mut cycle = vec![start];
    let mut prev = usize::MAX;
    let mut cur = start;
    loop {
        let nbrs = &adj[&cur];
        let next = if nbrs[0] != prev { nbrs[0] } else { nbrs[1] };
        if next == start {
            break;
        }
        cycle.push(next);
        prev = cur;
        cur = next;
        if cycle.len() > section_pts.len() {
            return None;
        }
    }
    if cycle.len() == section_pts.len() {
        Some(cycle)
    } else {
        None
    }
}

/// Volume of a cut piece (convex): fan from the vertex centroid.
pub fn piece_volume(result: &CutResult, piece: &CutPiece, dim: usize) -> f64 {
    if dim == 2 {
        let poly = &piece.faces[0].1;
        let pts: Vec<Point3> = poly.iter().map(|&i| result.verts[i].1).collect();
        polygon_area(&pts)
    } else {
        let mut centroid = [0.0f64; 3];
        let mut ids: Vec<usize> = piece.faces.iter().flat_map(|f| f.1.iter().copied()).collect();
        ids.sort_unstable();
        ids.dedup();
        for &i in &ids {
            centroid = geom::add(centroid, result.verts[i].1);
        }
        centroid = geom::scale(centroid, 1.0 / ids.len() as f64);
        let mut vol = 0.0;
        for (_, face) in &piece.faces {
            let p0 = result.verts[face[0]].1;
            for w in 1..(face.len() - 1) {
                vol += geom::tet_volume(
                    centroid,
                    p0,
                    result.verts[face[w]].1,
                    result.verts[face[w + 1]].1,
                );
            }
        }
        vol
    }
}

fn polygon_area(pts: &[Point3]) -> f64 {
    let mut area = 0.0;
    for i in 1..(pts.len() - 1) {
        area += geom::triangle_area(pts[0], pts[i], pts[i + 1]);
    }
    area
}

/// n-volume of the part of a simplex below level t.
pub fn below_volume(points: &[Point3], values: &[f64], t: f64) -> f64 {
    let total = simplex_volume(points);
    match cut_simplex(points, values, t, 0.0) {
        None => {
            // entirely on one side: use the barycenter value
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            if mean <= t {
                total
            } else {
                0.0
            }
        }
        Some(res) => match &res.below {
            Some(piece) => piece_volume(&res, piece, points.len() - 1),
            None => 0.0,
        },
    }
}

/// Fan triangulation of a polygon given by global vertex ids (cyclic),
/// starting at the smallest id so shared faces triangulate identically.
pub fn triangulate_polygon(poly: &[usize]) -> Vec<[usize; 3]> {
    let start = poly
        .iter()
        .enumerate()
        .min_by_key(|(_, &v)| v)
        .map(|(i, _)| i)
        .unwrap();
    let m = poly.len();
    let rot: Vec<usize> = (0..m).map(|i| poly[(start + i) % m]).collect();
    (1..(m - 1)).map(|i| [rot[0], rot[i], rot[i + 1]]).collect()
}

/// Canonical tetrahedralization of a convex cell given by its faces
/// (global ids, cyclic): cone from the smallest vertex id over the fan
/// triangulations of the faces that do not contain it.
pub fn triangulate_cell(faces: &[Vec<usize>]) -> Vec<[usize; 4]> {
    let apex = faces.iter().flat_map(|f| f.iter().copied()).min().unwrap();
    let mut tets = Vec::new();
    for face in faces {
        if face.contains(&apex) {
            continue;
        }
        for tri in triangulate_polygon(face) {
            tets.push([apex, tri[0], tri[1], tri[2]]);
        }
    }
    tets
}

/// Where a vertex of a derived complex sits in the root complex: the
/// minimal root face containing it (sorted root vertex ids) and its
/// barycentric coordinates over that face.
#[derive(Clone, Debug)]
pub struct Host {
    pub face: Vec<usize>,
    pub coords: Vec<f64>,
}

impl Host {
    pub fn root_vertex(v: usize) -> Self {
        Host { face: vec![v], coords: vec![1.0] }
    }

    pub fn is_root_vertex(&self) -> Option<usize> {
        if self.face.len() == 1 {
            Some(self.face[0])
        } else {
            None
        }
    }

    /// Is this vertex contained in the closed root face `face` (sorted)?
    pub fn on_face(&self, face: &[usize]) -> bool {
        self.face.iter().all(|v| face.binary_search(v).is_ok())
    }

    /// Affine combination (1-s) a + s b, support-pruned.
    pub fn combine(a: &Host, b: &Host, s: f64) -> Host {
        let mut face: Vec<usize> = a.face.iter().chain(b.face.iter()).copied().collect();
        face.sort_unstable();
        face.dedup();
        let coord_of = |h: &Host, v: usize| -> f64 {
            h.face
                .iter()
                .position(|&w| w == v)
                .map(|i| h.coords[i])
                .unwrap_or(0.0)
        };
        let coords: Vec<f64> = face
            .iter()
            .map(|&v| (1.0 - s) * coord_of(a, v) + s * coord_of(b, v))
            .collect();
        Host { face, coords }
    }
}

/// A complex derived from a root complex: a subcomplex, possibly refined
/// by cuts. Carries per-vertex hosts and the root top simplex each derived
/// top came from.
#[derive(Clone, Debug)]
pub struct DerivedComplex {
    pub complex: Arc<FlatComplex>,
    pub hosts: Vec<Host>,
    pub source_top: Vec<usize>,
}

impl DerivedComplex {
    pub fn root(complex: Arc<FlatComplex>) -> Self {
        let hosts = (0..complex.vertex_count()).map(Host::root_vertex).collect();
        let source_top = (0..complex.top_count()).collect();
        DerivedComplex { complex, hosts, source_top }
    }

    /// Subcomplex spanned by the given derived top simplices, with compact
    /// vertex ids. Returns the restriction plus the old->new vertex map.
    pub fn restrict(&self, tops: &[usize]) -> Result<(DerivedComplex, Vec<usize>)> {
        let k = &self.complex;
        let mut vertex_map = vec![usize::MAX; k.vertex_count()];
        let mut next = 0usize;
        let mut new_tops = Vec::with_capacity(tops.len());
        let mut source = Vec::with_capacity(tops.len());
        for &t in tops {
            for &v in k.top(t) {
                if vertex_map[v] == usize::MAX {
                    vertex_map[v] = next;
                    next += 1;
                }
            }
            let verts: Vec<usize> = k.top(t).iter().map(|&v| vertex_map[v]).collect();
            new_tops.push((verts, k.realization(t).to_vec()));
            source.push(self.source_top[t]);
        }
        let complex = FlatComplex::from_realized(k.dim(), next, new_tops)?;
        let mut hosts = vec![Host { face: Vec::new(), coords: Vec::new() }; next];
        for (old, &new) in vertex_map.iter().enumerate() {
            if new != usize::MAX {
                hosts[new] = self.hosts[old].clone();
            }
        }
        Ok((
            DerivedComplex { complex: Arc::new(complex), hosts, source_top: source },
            vertex_map,
        ))
    }

    /// Facet ids of this complex lying inside the given root facet
    /// (sorted root vertex ids).
    pub fn facets_on_root_facet(&self, root_facet: &[usize]) -> Vec<usize> {
        let k = &self.complex;
        (0..k.facet_count())
            .filter(|&f| {
                k.facet(f)
                    .iter()
                    .all(|&v| self.hosts[v].on_face(root_facet))
            })
            .collect()
    }
}

/// Result of cutting a derived complex along a level of a PL function.
pub struct CutComplex {
    pub derived: DerivedComplex,
    /// Old vertices keep their ids; this lists (u, v, s) for each new
    /// vertex (crossing on the old edge u-v at parameter s), in id order
    /// starting at the old vertex count.
    pub crossings: Vec<(usize, usize, f64)>,
    /// New top ids on each side of the cut.
    pub below_tops: Vec<usize>,
    pub above_tops: Vec<usize>,
    /// Facets of the new complex forming the level set.
    pub section: Chain,
    /// For each new top, the old top it came from.
    pub from_old_top: Vec<usize>,
}

/// Cut every simplex of `dc` crossed by the level {f = t}; pieces are
/// re-triangulated canonically so the result is again a valid complex.
pub fn cut_complex_along(
    dc: &DerivedComplex,
    values: &[f64],
    t: f64,
    snap: f64,
) -> Result<CutComplex> {
    let k = &dc.complex;
    let dim = k.dim();
    let mut crossings: Vec<(usize, usize, f64)> = Vec::new();
    let mut crossing_id: HashMap<[usize; 2], usize> = HashMap::new();
    let mut new_tops: Vec<(Vec<usize>, Vec<Point3>, bool, usize)> = Vec::new(); // verts, points, below, old top
    let mut section_facets: Vec<Vec<usize>> = Vec::new();
    let v0 = k.vertex_count();
    for t_id in 0..k.top_count() {
        let top = k.top(t_id);
        let vals: Vec<f64> = top.iter().map(|&v| values[v]).collect();
        let pts = k.realization(t_id);
        match cut_simplex(pts, &vals, t, snap) {
            None => {
                let mean = vals.iter().sum::<f64>() / vals.len() as f64;
                new_tops.push((top.to_vec(), pts.to_vec(), mean <= t, t_id));
            }
            Some(res) => {
                // map cut vertices to global ids
                let gid: Vec<usize> = res
                    .verts
                    .iter()
                    .map(|(cv, _p)| match cv {
                        CutVertex::Original(i) => top[*i],
                        CutVertex::OnEdge { i, j, s } => {
                            let key = [top[*i].min(top[*j]), top[*i].max(top[*j])];
                            *crossing_id.entry(key).or_insert_with(|| {
                                let s_from_min = if top[*i] < top[*j] { *s } else { 1.0 - *s };
                                crossings.push((key[0], key[1], s_from_min));
                                v0 + crossings.len() - 1
                            })
                        }
                    })
                    .collect();

                let point_of = |idx: usize| res.verts[idx].1;
                for piece in [res.below.as_ref(), res.above.as_ref()].into_iter().flatten() {
                    if dim == 2 {
                        let poly: Vec<usize> = piece.faces[0].1.iter().map(|&i| gid[i]).collect();
                        let local: HashMap<usize, usize> =
                            piece.faces[0].1.iter().map(|&i| (gid[i], i)).collect();
                        for tri in triangulate_polygon(&poly) {
                            let pts3: Vec<Point3> =
                                tri.iter().map(|v| point_of(local[v])).collect();
                            new_tops.push((tri.to_vec(), pts3, piece.below, t_id));
                        }
                    } else {
                        let faces: Vec<Vec<usize>> = piece
                            .faces
                            .iter()
                            .map(|(_, f)| f.iter().map(|&i| gid[i]).collect())
                            .collect();
                        let local: HashMap<usize, usize> = piece
                            .faces
                            .iter()
                            .flat_map(|(_, f)| f.iter().map(|&i| (gid[i], i)))
                            .collect();
                        for tet in triangulate_cell(&faces) {
                            let pts3: Vec<Point3> =
                                tet.iter().map(|v| point_of(local[v])).collect();
                            new_tops.push((tet.to_vec(), pts3, piece.below, t_id));
                        }
                    }
                }
                // section facets (global ids)
                if !res.section.is_empty() {
                    let poly: Vec<usize> = res.section.iter().map(|&i| gid[i]).collect();
                    if dim == 2 {
                        section_facets.push(poly);
                    } else {
                        for tri in triangulate_polygon(&poly) {
                            section_facets.push(tri.to_vec());
                        }
                    }
                }
            }
        }
    }
    let total_vertices = v0 + crossings.len();
    let tops_with_points: Vec<(Vec<usize>, Vec<Point3>)> = new_tops
        .iter()
        .map(|(verts, pts, _, _)| (verts.clone(), pts.clone()))
        .collect();
    let complex = FlatComplex::from_realized(dim, total_vertices, tops_with_points)?;
    // hosts for the new vertices
    let mut hosts = dc.hosts.clone();
    for &(u, v, s) in &crossings {
        hosts.push(Host::combine(&dc.hosts[u], &dc.hosts[v], s));
    }
    let source_top: Vec<usize> = new_tops.iter().map(|&(_, _, _, old)| dc.source_top[old]).collect();
    let from_old_top: Vec<usize> = new_tops.iter().map(|&(_, _, _, old)| old).collect();
    let below_tops: Vec<usize> = new_tops
        .iter()
        .enumerate()
        .filter(|(_, (_, _, below, _))| *below)
        .map(|(i, _)| i)
        .collect();
    let above_tops: Vec<usize> = new_tops
        .iter()
        .enumerate()
        .filter(|(_, (_, _, below, _))| !*below)
        .map(|(i, _)| i)
        .collect();
    let mut section = Chain::new();
    for tuple in &section_facets {
        let f = complex
            .facet_id(tuple)
            .ok_or_else(|| Error::InvalidChain {
                message: "section facet missing after triangulation".into(),
            })?;
        if !section.contains(f) {
            section.toggle(f);
        }
    }
    let derived = DerivedComplex { complex: Arc::new(complex), hosts, source_top };
    Ok(CutComplex { derived, crossings, below_tops, above_tops, section, from_old_top })
}
