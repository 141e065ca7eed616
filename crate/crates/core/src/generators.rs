//! Test-manifold generators: flat tori (exact), icospheres (edge lengths
//! from the round embedding) and convex polygon disks.

use crate::complex::FlatComplex;
use crate::geom::{self, Point3};
use crate::{Error, Result};

/// Unit-area flat square torus, k x k grid, each square split into two
/// triangles along the same diagonal. 2 k^2 triangles, no boundary.
pub fn flat_torus_2d(k: usize) -> Result<FlatComplex> {
    if k < 3 {
        return Err(Error::BadParams { message: format!("flat-torus-2d needs k >= 3 (vertex tuples alias below that), got {k}") });
    }
    let h = 1.0 / k as f64;
    let at = |i: usize, j: usize| (i % k) * k + (j % k);
    let mut tops = Vec::with_capacity(2 * k * k);
    let mut edges = std::collections::HashMap::new();
    let mut add_edge = |a: usize, b: usize, len: f64| {
        edges.entry([a.min(b), a.max(b)]).or_insert(len);
    };
    for i in 0..k {
        for j in 0..k {
            let a = at(i, j);
            let b = at(i + 1, j);
            let c = at(i + 1, j + 1);
            let d = at(i, j + 1);
            tops.push(vec![a, b, c]);
            tops.push(vec![a, c, d]);
            add_edge(a, b, h);
            add_edge(b, c, h);
            add_edge(c, d, h);
            add_edge(a, d, h);
            add_edge(a, c, h * 2.0f64.sqrt());
        }
    }
    let mut edge_vec: Vec<(usize, usize, f64)> =
        edges.into_iter().map(|(e, l)| (e[0], e[1], l)).collect();
    edge_vec.sort_by_key(|&(u, v, _)| (u, v));
    FlatComplex::from_edge_lengths(2, k * k, tops, edge_vec)
}

/// Unit-volume flat cubic 3-torus, k x k x k grid, each cube split into
/// six tetrahedra (Kuhn subdivision, consistent across faces).
/// 6 k^3 tetrahedra, no boundary.
pub fn flat_torus_3d(k: usize) -> Result<FlatComplex> {
    if k < 3 {
        return Err(Error::BadParams { message: format!("flat-torus-3d needs k >= 3 (vertex tuples alias below that), got {k}") });
    }
    let h = 1.0 / k as f64;
    let at = |i: usize, j: usize, l: usize| ((i % k) * k + (j % k)) * k + (l % k);
    // Kuhn: tets 0 -> +e_{p(0)} -> +e_{p(1)} -> +e_{p(2)} over all 6
    // permutations of the axes.
    let perms: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let mut tops = Vec::with_capacity(6 * k * k * k);
    let mut edges = std::collections::HashMap::new();
    for i in 0..k {
        for j in 0..k {
            for l in 0..k {
                for p in perms {
                    let mut corner = [i, j, l];
                    let mut chain = vec![at(corner[0], corner[1], corner[2])];
                    let mut offsets = vec![[0usize; 3]];
                    for &axis in &p {
                        corner[axis] += 1;
                        chain.push(at(corner[0], corner[1], corner[2]));
                        let mut off = *offsets.last().unwrap();
                        off[axis] += 1;
                        offsets.push(off);
                    }
                    for a in 0..4 {
                        for b in (a + 1)..4 {
                            let da = offsets[a];
                            let db = offsets[b];
                            let d2: usize = (0..3)
                                .map(|x| {
                                    let d = db[x] as isize - da[x] as isize;
                                    (d * d) as usize
                                })
                                .sum();
                            let key = [chain[a].min(chain[b]), chain[a].max(chain[b])];
                            edges.entry(key).or_insert(h * (d2 as f64).sqrt());
                        }
                    }
                    tops.push(chain);
                }
            }
        }
    }
    let mut edge_vec: Vec<(usize, usize, f64)> =
        edges.into_iter().map(|(e, l)| (e[0], e[1], l)).collect();
    edge_vec.sort_by_key(|&(u, v, _)| (u, v));
    FlatComplex::from_edge_lengths(3, k * k * k, tops, edge_vec)
}

/// Icosphere: the icosahedron subdivided `subdiv` times, vertices pushed
/// to the sphere of the given radius. Edge lengths are chords of the
/// round embedding, so curvature concentrates at the vertices; the
/// maximum angle defect is returned alongside.
pub fn icosphere(subdiv: usize, radius: f64) -> Result<(FlatComplex, f64)> {
    if !(radius > 0.0) {
        return Err(Error::BadParams { message: format!("icosphere radius must be > 0, got {radius}") });
    }
    if subdiv > 7 {
        return Err(Error::BadParams { message: format!("icosphere subdiv too large: {subdiv}") });
    }
    let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
    let mut coords: Vec<Point3> = vec![
        [-1.0, phi, 0.0],
        [1.0, phi, 0.0],
        [-1.0, -phi, 0.0],
        [1.0, -phi, 0.0],
        [0.0, -1.0, phi],
        [0.0, 1.0, phi],
        [0.0, -1.0, -phi],
        [0.0, 1.0, -phi],
        [phi, 0.0, -1.0],
        [phi, 0.0, 1.0],
        [-phi, 0.0, -1.0],
        [-phi, 0.0, 1.0],
    ];
    let mut tris: Vec<[usize; 3]> = vec![
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
    let project = |p: Point3, r: f64| -> Point3 { geom::scale(p, r / geom::norm(p)) };
    for c in &mut coords {
        *c = project(*c, radius);
    }
    for _ in 0..subdiv {
        let mut midpoint: std::collections::HashMap<[usize; 2], usize> =
            std::collections::HashMap::new();
        let mut next = Vec::with_capacity(tris.len() * 4);
        for t in &tris {
            let mut mid = [0usize; 3];
            for e in 0..3 {
                let a = t[e];
                let b = t[(e + 1) % 3];
                let key = [a.min(b), a.max(b)];
                mid[e] = *midpoint.entry(key).or_insert_with(|| {
                    let m = geom::scale(geom::add(coords[a], coords[b]), 0.5);
                    coords.push(project(m, radius));
                    coords.len() - 1
                });
            }
            next.push([t[0], mid[0], mid[2]]);
            next.push([t[1], mid[1], mid[0]]);
            next.push([t[2], mid[2], mid[1]]);
            next.push([mid[0], mid[1], mid[2]]);
        }
        tris = next;
    }
    let complex = FlatComplex::from_embedded(
        2,
        coords,
        tris.iter().map(|t| t.to_vec()).collect(),
    )?;
    let defect = max_angle_defect(&complex);
    Ok((complex, defect))
}

/// Maximum angle defect 2 pi - sum of incident angles over vertices
/// (0 for genuinely flat interior vertices).
pub fn max_angle_defect(k: &FlatComplex) -> f64 {
    let mut angle_sum = vec![0.0f64; k.vertex_count()];
    for t in 0..k.top_count() {
        let top = k.top(t);
        let pts = k.realization(t);
        if k.dim() != 2 {
            return f64::NAN;
        }
        for i in 0..3 {
            let a = pts[i];
            let b = pts[(i + 1) % 3];
            let c = pts[(i + 2) % 3];
            let u = geom::sub(b, a);
            let v = geom::sub(c, a);
            let cosang =
                (geom::dot(u, v) / (geom::norm(u) * geom::norm(v))).clamp(-1.0, 1.0);
            angle_sum[top[i]] += cosang.acos();
        }
    }
    angle_sum
        .iter()
        .map(|&s| (2.0 * std::f64::consts::PI - s).abs())
        .fold(0.0, f64::max)
}

/// Fan triangulation of a regular m-gon with unit circumradius: m
/// triangles around the center, boundary nonempty.
pub fn convex_polygon_disk(m: usize) -> Result<FlatComplex> {
    if m < 3 {
        return Err(Error::BadParams { message: format!("polygon disk needs m >= 3, got {m}") });
    }
    let mut coords: Vec<Point3> = vec![[0.0, 0.0, 0.0]];
    for i in 0..m {
        let ang = 2.0 * std::f64::consts::PI * i as f64 / m as f64;
        coords.push([ang.cos(), ang.sin(), 0.0]);
    }
    let tops: Vec<Vec<usize>> = (0..m)
        .map(|i| vec![0, 1 + i, 1 + (i + 1) % m])
        .collect();
    FlatComplex::from_embedded(2, coords, tops)
}

/// Build a generator by name; parameters as (name, value) pairs.
pub fn generate(name: &str, params: &[(String, f64)]) -> Result<FlatComplex> {
    let get = |key: &str| -> Option<f64> {
        params.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    };
    match name {
        "flat-torus-2d" => {
            let k = get("k").ok_or_else(|| Error::BadParams { message: "missing k".into() })?;
            flat_torus_2d(k as usize)
        }
        "flat-torus-3d" => {
            let k = get("k").ok_or_else(|| Error::BadParams { message: "missing k".into() })?;
            flat_torus_3d(k as usize)
        }
        "icosphere" => {
            let s = get("subdiv").ok_or_else(|| Error::BadParams { message: "missing subdiv".into() })?;
            let r = get("radius").unwrap_or(1.0);
            icosphere(s as usize, r).map(|(k, _)| k)
        }
        "convex-polygon-disk" => {
            let m = get("m").ok_or_else(|| Error::BadParams { message: "missing m".into() })?;
            convex_polygon_disk(m as usize)
        }
        other => Err(Error::BadParams { message: format!("unknown generator '{other}'") }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn torus_2d_counts_and_area() {
        let k = flat_torus_2d(16).unwrap();
        assert_eq!(k.top_count(), 512);
        assert_eq!(k.vertex_count(), 256);
        assert!(k.boundary_facets().is_empty());
        assert!((k.volume() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn torus_3d_counts_and_volume() {
        let k = flat_torus_3d(4).unwrap();
        assert_eq!(k.top_count(), 384);
        assert!(k.boundary_facets().is_empty());
        assert!((k.volume() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn torus_3d_small_volume() {
        let k = flat_torus_3d(3).unwrap();
        assert_eq!(k.top_count(), 162);
        assert!((k.volume() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn icosphere_area_close_to_round_sphere() {
        let (k, defect) = icosphere(3, 1.0).unwrap();
        assert_eq!(k.top_count(), 1280);
        assert!(k.boundary_facets().is_empty());
        let round = 4.0 * std::f64::consts::PI;
        assert!(
            (k.volume() - round).abs() < 0.02 * round,
            "area {} vs {round}",
            k.volume()
        );
        assert!(defect > 0.0 && defect < 0.3);
    }

    #[test]
    fn polygon_disk_has_boundary() {
        let k = convex_polygon_disk(8).unwrap();
        assert_eq!(k.top_count(), 8);
        assert_eq!(k.boundary_facets().len(), 8);
        // area of a regular 8-gon with unit circumradius
        let want = 0.5 * 8.0 * (2.0 * std::f64::consts::PI / 8.0).sin();
        assert!((k.volume() - want).abs() < 1e-12);
    }

    #[test]
    fn bad_params_reported() {
        assert!(matches!(flat_torus_2d(2), Err(Error::BadParams { .. })));
        assert!(matches!(flat_torus_3d(2), Err(Error::BadParams { .. })));
        assert!(matches!(generate("nope", &[]), Err(Error::BadParams { .. })));
    }
}
