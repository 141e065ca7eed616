//! Merging two sub-sweeps across a splitting chain.
//!
//! The two functions are rescaled into (-2,-1) and (1,2), every simplex
//! touching the interface is truncated at the epsilon-points of its edges
//! (a cut along the level 1 - eps of the indicator of interface
//! vertices), interface vertices get fresh pairwise-distinct values near
//! zero and the cut vertices keep the side function's interpolated value,
//! so the merged function agrees with the inputs outside the collar.
//! The level sets crossing the collar are measured per truncated simplex:
//! eta against the simplex's own interface area for the big cells, the
//! absolute section for the small ones.

use crate::complex::{
    cut_complex_along, Chain, DerivedComplex, FlatComplex, PlMorse,
};
use crate::geom::KahanSum;
use crate::{Error, Result, CERT_REL_TOL};
use serde::Serialize;
use std::collections::HashMap;
use std::sync::Arc;

#[derive(Clone, Debug, Serialize, serde::Deserialize)]
pub struct MergeStats {
    pub epsilon: f64,
    pub vol_s: f64,
    /// max over big collar cells of (max level section) / (own S-area)
    pub eta: f64,
    /// max over small collar cells of the max level section
    pub delta: f64,
    /// number of simplices in small collar cells
    pub n_small: usize,
    pub n_big: usize,
    pub child_widths: [f64; 2],
    pub width: f64,
    /// max child + 2n vol(S) eta + n^2 N_s delta
    pub bound: f64,
}

pub struct MergeOutcome {
    pub derived: DerivedComplex,
    pub morse: PlMorse,
    pub stats: MergeStats,
}

pub struct MergeSide<'a> {
    pub derived: &'a DerivedComplex,
    pub values: &'a [f64],
    pub width: f64,
}

/// Affine rescale of `values` onto (lo, hi), strictly inside.
fn rescale(values: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let vmin = values.iter().copied().fold(f64::INFINITY, f64::min);
    let vmax = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = (vmax - vmin).max(f64::MIN_POSITIVE);
    let margin = 0.01 * (hi - lo);
    values
        .iter()
        .map(|&v| lo + margin + (hi - lo - 2.0 * margin) * (v - vmin) / span)
        .collect()
}

struct Union {
    tops: Vec<(Vec<usize>, Vec<crate::geom::Point3>)>,
    hosts: Vec<crate::complex::Host>,
    source_top: Vec<usize>,
    /// rescaled side values where defined
    val1: Vec<Option<f64>>,
    val2: Vec<Option<f64>>,
    on_s: Vec<bool>,
    vertex_count: usize,
}

/// Glue the right complex and the (cone-conformed) left complex along the
/// interface, identifying root vertices. The left side must be unrefined
/// on the interface; the right side's subdivision of interface facets is
/// reproduced on the left by coning each affected left simplex from its
/// barycenter.
fn build_union(
    root: &FlatComplex,
    left: &MergeSide,
    right: &MergeSide,
    s_facets: &Chain,
) -> Result<Union> {
    let s_tuples: Vec<Vec<usize>> = s_facets
        .facets()
        .map(|f| root.facet(f).to_vec())
        .collect();
    let on_any_s = |host: &crate::complex::Host| s_tuples.iter().any(|f| host.on_face(f));
    let rk = &right.derived.complex;
    let lk = &left.derived.complex;
    let f1 = rescale(left.values, -2.0, -1.0);
    let f2 = rescale(right.values, 1.0, 2.0);
    // union ids: right vertices first
    let mut hosts: Vec<crate::complex::Host> = right.derived.hosts.clone();
    let mut val1: Vec<Option<f64>> = vec![None; rk.vertex_count()];
    let mut val2: Vec<Option<f64>> = f2.iter().copied().map(Some).collect();
    let mut root_map: HashMap<usize, usize> = HashMap::new();
    for (v, h) in right.derived.hosts.iter().enumerate() {
        if let Some(r) = h.is_root_vertex() {
            root_map.entry(r).or_insert(v);
        }
    }
    let mut left_map = vec![usize::MAX; lk.vertex_count()];
    let mut left_root: HashMap<usize, usize> = HashMap::new();
    for v in 0..lk.vertex_count() {
        let host = &left.derived.hosts[v];
        if let Some(r) = host.is_root_vertex() {
            left_root.entry(r).or_insert(v);
        }
        let id = match host.is_root_vertex().and_then(|r| root_map.get(&r).copied()) {
            Some(existing) => existing,
            None => {
                hosts.push(host.clone());
                val2.push(None);
                val1.push(None);
                hosts.len() - 1
            }
        };
        left_map[v] = id;
        val1[id] = Some(f1[v]);
    }
    // left-function value at a union vertex given by its host barycentrics
    // (all host corners must be left vertices)
    let left_value_at = |host: &crate::complex::Host| -> Option<f64> {
        let mut acc = 0.0;
        for (rv, &c) in host.face.iter().zip(&host.coords) {
            acc += c * f1[*left_root.get(rv)?];
        }
        Some(acc)
    };
    // right subdivision of each interface facet, as union vertex tuples
    let mut s_subdivision: HashMap<Vec<usize>, Vec<Vec<usize>>> = HashMap::new();
    for &bf in rk.boundary_facets() {
        let verts = rk.facet(bf);
        for tuple in &s_tuples {
            if verts.iter().all(|&v| right.derived.hosts[v].on_face(tuple)) {
                s_subdivision
                    .entry(tuple.clone())
                    .or_default()
                    .push(verts.to_vec());
                break;
            }
        }
    }
    // right vertices interior to root edges of interface facets: the left
    // side must split the incident faces along them
    let mut edge_points: HashMap<[usize; 2], Vec<(f64, usize)>> = HashMap::new();
    for (v, h) in right.derived.hosts.iter().enumerate() {
        if h.face.len() == 2 && s_tuples.iter().any(|f| h.on_face(f)) {
            let key = [h.face[0], h.face[1]];
            // parameter measured from the smaller root endpoint
            edge_points.entry(key).or_default().push((h.coords[1], v));
        }
    }
    for pts in edge_points.values_mut() {
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    // boundary polygon of a facet given as root ids + union ids, walking
    // the corners in the given cyclic order and inserting edge points
    let facet_polygon = |roots: &[usize], unions: &[usize]| -> Vec<usize> {
        let m = roots.len();
        let mut poly = Vec::new();
        for a in 0..m {
            poly.push(unions[a]);
            let (ru, rv) = (roots[a], roots[(a + 1) % m]);
            let key = [ru.min(rv), ru.max(rv)];
            if let Some(pts) = edge_points.get(&key) {
                if ru < rv {
                    poly.extend(pts.iter().map(|&(_, v)| v));
                } else {
                    poly.extend(pts.iter().rev().map(|&(_, v)| v));
                }
            }
        }
        poly
    };
    let mut tops: Vec<(Vec<usize>, Vec<crate::geom::Point3>)> = Vec::new();
    let mut source_top = Vec::new();
    for t in 0..rk.top_count() {
        tops.push((rk.top(t).to_vec(), rk.realization(t).to_vec()));
        source_top.push(right.derived.source_top[t]);
    }
    // centers of left facets that need a subdivided fan (keyed by the
    // sorted root tuple so adjacent simplices agree)
    let mut facet_center: HashMap<Vec<usize>, usize> = HashMap::new();
    // left side: cone-conform simplices whose interface facets or edges
    // the right side has subdivided
    for t in 0..lk.top_count() {
        let top = lk.top(t);
        let pts = lk.realization(t);
        let mapped: Vec<usize> = top.iter().map(|&v| left_map[v]).collect();
        let roots: Vec<usize> = {
            let mut r = Vec::with_capacity(top.len());
            for &v in top {
                let Some(root) = left.derived.hosts[v].is_root_vertex() else {
                    return Err(Error::InvalidChain {
                        message: "left side refined on the interface".into(),
                    });
                };
                r.push(root);
            }
            r
        };
        let mut trivial = true;
        for omit in 0..top.len() {
            let mut fverts: Vec<usize> =
                (0..top.len()).filter(|&i| i != omit).map(|i| roots[i]).collect();
            fverts.sort_unstable();
            if let Some(sub) = s_subdivision.get(&fverts) {
                if sub.len() > 1 {
                    trivial = false;
                }
            }
        }
        for i in 0..top.len() {
            for j in (i + 1)..top.len() {
                let key = [roots[i].min(roots[j]), roots[i].max(roots[j])];
                if edge_points.contains_key(&key) {
                    trivial = false;
                }
            }
        }
        if trivial {
            tops.push((mapped, pts.to_vec()));
            source_top.push(left.derived.source_top[t]);
            continue;
        }
        // cone from the barycenter over every facet, using the right
        // side's triangles on subdivided interface facets
        let mut bary = [0.0f64; 3];
        for p in pts {
            bary = crate::geom::add(bary, *p);
        }
        bary = crate::geom::scale(bary, 1.0 / pts.len() as f64);
        let bary_id = hosts.len();
        let root_tuple = roots.clone();
        let mut sorted_tuple = root_tuple.clone();
        sorted_tuple.sort_unstable();
        hosts.push(crate::complex::Host {
            face: sorted_tuple,
            coords: vec![1.0 / top.len() as f64; top.len()],
        });
        val1.push(Some(f1_at_bary(&f1, top)));
        val2.push(None);
        // position of a union vertex (on this simplex) in this frame
        let locate = |hosts: &[crate::complex::Host], u: usize| -> crate::geom::Point3 {
            let h = &hosts[u];
            let mut p = [0.0f64; 3];
            for (rv, &c) in h.face.iter().zip(&h.coords) {
                let local = root_tuple
                    .iter()
                    .position(|&r| r == *rv)
                    .expect("host inside the simplex");
                p = crate::geom::add(p, crate::geom::scale(pts[local], c));
            }
            p
        };
        for omit in 0..top.len() {
            let mut fverts_root: Vec<usize> = Vec::new();
            let mut fverts_union: Vec<usize> = Vec::new();
            for (i, &v) in top.iter().enumerate() {
                if i != omit {
                    fverts_root.push(roots[i]);
                    fverts_union.push(left_map[v]);
                }
            }
            let mut key = fverts_root.clone();
            key.sort_unstable();
            let pieces: Vec<Vec<usize>> = match s_subdivision.get(&key) {
                Some(sub) if sub.len() > 1 => sub.clone(),
                _ => {
                    if fverts_root.len() == 2 {
                        // an edge facet: split it at the interior points
                        let (ru, rv) = (fverts_root[0], fverts_root[1]);
                        let ekey = [ru.min(rv), ru.max(rv)];
                        let mut chain_ids = vec![fverts_union[0]];
                        if let Some(pts_on) = edge_points.get(&ekey) {
                            if ru < rv {
                                chain_ids.extend(pts_on.iter().map(|&(_, v)| v));
                            } else {
                                chain_ids.extend(pts_on.iter().rev().map(|&(_, v)| v));
                            }
                        }
                        chain_ids.push(fverts_union[1]);
                        chain_ids.windows(2).map(|w| w.to_vec()).collect()
                    } else {
                        let poly = facet_polygon(&fverts_root, &fverts_union);
                        if poly.len() == fverts_root.len() {
                            vec![fverts_union.clone()]
                        } else {
                            // split edges may leave collinear runs on the
                            // polygon boundary; fan from the facet center
                            let center = *facet_center.entry(key.clone()).or_insert_with(|| {
                                let id = hosts.len();
                                hosts.push(crate::complex::Host {
                                    face: key.clone(),
                                    coords: vec![1.0 / key.len() as f64; key.len()],
                                });
                                let mean = key
                                    .iter()
                                    .map(|r| f1[left_root[r]])
                                    .sum::<f64>()
                                    / key.len() as f64;
                                val1.push(Some(mean));
                                val2.push(None);
                                id
                            });
                            let m = poly.len();
                            (0..m)
                                .map(|i| vec![center, poly[i], poly[(i + 1) % m]])
                                .collect()
                        }
                    }
                }
            };
            let mut fill_val1: Vec<(usize, f64)> = Vec::new();
            for piece in pieces {
                let mut verts = vec![bary_id];
                verts.extend(piece.iter().copied());
                let mut points = vec![bary];
                for &u in &piece {
                    points.push(locate(&hosts, u));
                    if val1[u].is_none() {
                        let v = left_value_at(&hosts[u]).ok_or_else(|| Error::InvalidChain {
                            message: "interface vertex outside the left cell".into(),
                        })?;
                        fill_val1.push((u, v));
                    }
                }
                tops.push((verts, points));
                source_top.push(left.derived.source_top[t]);
            }
            for (u, v) in fill_val1 {
                val1[u] = Some(v);
            }
        }
    }
    let on_s: Vec<bool> = hosts.iter().map(on_any_s).collect();
    let vertex_count = hosts.len();
    Ok(Union {
        tops,
        hosts,
        source_top,
        val1,
        val2,
        on_s,
        vertex_count,
    })
}

fn f1_at_bary(f1: &[f64], top: &[usize]) -> f64 {
    top.iter().map(|&v| f1[v]).sum::<f64>() / top.len() as f64
}

/// Merge two PL Morse functions along the chain `s_facets` (facets of the
/// root complex). `epsilon` in (0, 1/4) is the edge-truncation parameter.
pub fn merge(
    root: &FlatComplex,
    left: MergeSide,
    right: MergeSide,
    s_facets: &Chain,
    epsilon: f64,
) -> Result<MergeOutcome> {
    if !(epsilon > 0.0 && epsilon < 0.25) {
        return Err(Error::EpsilonTooLarge { epsilon });
    }
    let n = root.dim();
    let vol_s = s_facets.volume(root);
    if s_facets.is_empty() {
        return merge_disjoint(left, right);
    }
    let union = build_union(root, &left, &right, s_facets)?;
    let union_derived = DerivedComplex {
        complex: Arc::new(FlatComplex::from_realized(
            n,
            union.vertex_count,
            union.tops.clone(),
        )?),
        hosts: union.hosts.clone(),
        source_top: union.source_top.clone(),
    };
    let uk = &union_derived.complex;
    // indicator of interface vertices; cut at 1 - eps
    let indicator: Vec<f64> = union.on_s.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
    let cut = cut_complex_along(&union_derived, &indicator, 1.0 - epsilon, 1e-9)?;
    let ck = &cut.derived.complex;
    // side of each union vertex (for crossing values)
    let side_of_vertex: Vec<u8> = (0..union.vertex_count)
        .map(|v| match (union.val1[v], union.val2[v]) {
            (Some(_), None) => 1u8,
            (None, Some(_)) => 2u8,
            _ => 0u8, // interface or shared: resolved per edge
        })
        .collect();
    let side_value = |v: usize, side: u8| -> f64 {
        match side {
            1 => union.val1[v].expect("side-1 value"),
            _ => union.val2[v].expect("side-2 value"),
        }
    };
    // final values
    let mut raw = vec![0.0f64; ck.vertex_count()];
    let window = epsilon / 4.0;
    let s_vertices: Vec<usize> = (0..union.vertex_count).filter(|&v| union.on_s[v]).collect();
    let m = s_vertices.len() as f64;
    for (rank, &v) in s_vertices.iter().enumerate() {
        raw[v] = -window + 2.0 * window * (rank as f64 + 1.0) / (m + 1.0);
    }
    for v in 0..union.vertex_count {
        if !union.on_s[v] {
            raw[v] = match side_of_vertex[v] {
                1 => union.val1[v].unwrap(),
                2 => union.val2[v].unwrap(),
                _ => union.val1[v].or(union.val2[v]).expect("vertex on some side"),
            };
        }
    }
    for (i, &(u, v, s)) in cut.crossings.iter().enumerate() {
        // the crossing lies on an edge with exactly one interface endpoint
        let (on, off) = if union.on_s[u] { (u, v) } else { (v, u) };
        let side = if side_of_vertex[off] != 0 {
            side_of_vertex[off]
        } else {
            1
        };
        let vu = side_value(on, side);
        let vv = side_value(off, side);
        // s is the parameter from u to v
        let val = if on == u {
            (1.0 - s) * vu + s * vv
        } else {
            (1.0 - s) * vv + s * vu
        };
        raw[union.vertex_count + i] = val;
    }
    let morse = PlMorse::perturbed(cut.derived.complex.clone(), raw)?;
    // measurements: group collar (above-side) simplices by old union top
    let mut collar_of: HashMap<usize, Vec<usize>> = HashMap::new();
    for &t in &cut.above_tops {
        collar_of.entry(cut.from_old_top[t]).or_default().push(t);
    }
    let mut eta: f64 = 0.0;
    let mut delta: f64 = 0.0;
    let mut n_small = 0usize;
    let mut n_big = 0usize;
    for (&old_top, pieces) in collar_of.iter() {
        // S-area of the old union simplex: its facets with all vertices
        // on the interface
        let mut s_area = KahanSum::new();
        for &f in uk.top_facet_ids(old_top) {
            if uk.facet(f).iter().all(|&v| union.on_s[v]) {
                s_area.add(uk.facet_volume(f));
            }
        }
        let max_section =
            crate::complex::width_over_tops(ck, &morse.values, pieces);
        if s_area.value() > 0.0 {
            n_big += 1;
            eta = eta.max(max_section / s_area.value());
        } else {
            n_small += pieces.len();
            delta = delta.max(max_section);
        }
    }
    let profile = morse.width_profile();
    let width = profile.width;
    let max_child = left.width.max(right.width);
    let bound = max_child
        + 2.0 * n as f64 * vol_s * eta
        + (n * n) as f64 * n_small as f64 * delta;
    let stats = MergeStats {
        epsilon,
        vol_s,
        eta,
        delta,
        n_small,
        n_big,
        child_widths: [left.width, right.width],
        width,
        bound,
    };
    // the merge budget is a hard certificate
    let slack = CERT_REL_TOL * (1.0 + width.abs());
    if width > bound + slack {
        return Err(Error::MergeBudgetFailure { achieved: width, budget: bound });
    }
    Ok(MergeOutcome { derived: cut.derived, morse, stats })
}

/// S empty: the two sides do not interact; shift the ranges apart.
fn merge_disjoint(left: MergeSide, right: MergeSide) -> Result<MergeOutcome> {
    let f1 = rescale(left.values, -2.0, -1.0);
    let f2 = rescale(right.values, 1.0, 2.0);
    let lk = &left.derived.complex;
    let rk = &right.derived.complex;
    let mut tops: Vec<(Vec<usize>, Vec<crate::geom::Point3>)> = Vec::new();
    let offset = lk.vertex_count();
    for t in 0..lk.top_count() {
        tops.push((lk.top(t).to_vec(), lk.realization(t).to_vec()));
    }
    for t in 0..rk.top_count() {
        tops.push((
            rk.top(t).iter().map(|&v| v + offset).collect(),
            rk.realization(t).to_vec(),
        ));
    }
    let complex = Arc::new(FlatComplex::from_realized(
        lk.dim(),
        lk.vertex_count() + rk.vertex_count(),
        tops,
    )?);
    let mut hosts = left.derived.hosts.clone();
    hosts.extend(right.derived.hosts.iter().cloned());
    let mut source_top = left.derived.source_top.clone();
    source_top.extend(right.derived.source_top.iter().copied());
    let derived = DerivedComplex { complex: complex.clone(), hosts, source_top };
    let mut raw = f1;
    raw.extend(f2);
    let morse = PlMorse::perturbed(complex, raw)?;
    let width = morse.width_profile().width;
    let stats = MergeStats {
        epsilon: 0.0,
        vol_s: 0.0,
        eta: 0.0,
        delta: 0.0,
        n_small: 0,
        n_big: 0,
        child_widths: [left.width, right.width],
        width,
        bound: left.width.max(right.width),
    };
    Ok(MergeOutcome { derived, morse, stats })
}
