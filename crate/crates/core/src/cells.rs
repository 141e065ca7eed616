//! Quasi-convex cell structures: greedy ball packing, Voronoi cells with
//! an a-posteriori (rho, lambda) certificate, and the discrete radial
//! projection of chains onto cell boundaries.
//!
//! The certificate is measured on the mesh's own cells rather than by
//! rebuilding geometry: lambda is the smallest factor making the ball
//! containments B(x_i, 2 rho / lambda) <= cell <= B(x_i, 6 rho lambda)
//! true in the graph metric, inflated if needed until the cell-count
//! sandwich N lambda^-n omega_n 2^n rho^n <= vol <= N lambda^n omega_n
//! 6^n rho^n holds as well.

use crate::complex::{Chain, DistanceOptions, FlatComplex};
use crate::constants::unit_ball_volumes;
use crate::splitter::mincut::{cell_facets, chain_boundary_in_cell, facet_ridges, min_boundary_chain};
use crate::{Error, Result, CERT_REL_TOL, REL_TIE};
use serde::Serialize;
use std::collections::BTreeSet;

#[derive(Clone, Debug, Serialize)]
pub struct Cell {
    pub center: usize,
    pub tops: Vec<usize>,
    pub volume: f64,
    /// max graph distance from the center to a member barycenter
    pub containment_radius: f64,
    /// min graph distance from the center to a foreign barycenter
    pub free_radius: f64,
}

#[derive(Clone, Debug)]
pub struct CellStructure {
    pub cells: Vec<Cell>,
    pub rho: f64,
    pub lambda: f64,
    /// facets separating distinct cells or lying on the domain boundary
    pub skeleton: Vec<usize>,
    /// (cell i, cell j, shared (n-1)-volume), i < j
    pub adjacency: Vec<(usize, usize, f64)>,
    pub cell_of_top: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CellCertificate {
    pub rho: f64,
    pub lambda: f64,
    pub n_cells: usize,
    pub volume: f64,
    pub eq_n_lower: f64,
    pub eq_n_upper: f64,
    pub eq_n_holds: bool,
    pub cells: Vec<Cell>,
}

#[derive(Clone, Copy, Debug)]
pub struct PackOptions {
    /// hard cap on the number of centers
    pub center_cap: usize,
}

impl Default for PackOptions {
    fn default() -> Self {
        PackOptions { center_cap: 100_000 }
    }
}

/// Greedy maximal packing of disjoint 2 rho balls: vertices are accepted
/// when their graph distance to every accepted center exceeds 4 rho.
/// When the complex has boundary, vertices near the locus d(., boundary)
/// = 2 rho are offered first. Every vertex ends within 4 rho of a center.
pub fn pack_centers(complex: &FlatComplex, rho: f64, opts: PackOptions) -> Result<Vec<usize>> {
    assert!(rho > 0.0, "rho must be positive");
    let nv = complex.vertex_count();
    let mut order: Vec<usize> = (0..nv).collect();
    if !complex.boundary_facets().is_empty() {
        let mut bd_vertices: BTreeSet<usize> = BTreeSet::new();
        for &f in complex.boundary_facets() {
            bd_vertices.extend(complex.facet(f).iter().copied());
        }
        let sources: Vec<usize> = bd_vertices.into_iter().collect();
        let field = complex.vertex_distances(&sources, DistanceOptions::default());
        let band = complex.longest_edge();
        // vertices in the discrete locus band first, nearest to 2 rho wins
        order.sort_by(|&a, &b| {
            let da = (field.dist[a] - 2.0 * rho).abs();
            let db = (field.dist[b] - 2.0 * rho).abs();
            let ba = da <= band;
            let bb = db <= band;
            bb.cmp(&ba).then(da.total_cmp(&db)).then(a.cmp(&b))
        });
    }
    let mut centers = Vec::new();
    let mut mindist = vec![f64::INFINITY; nv];
    for &v in &order {
        if mindist[v] > 4.0 * rho * (1.0 + REL_TIE) {
            centers.push(v);
            if centers.len() > opts.center_cap {
                return Err(Error::RhoTooSmall { rho, cap: opts.center_cap });
            }
            let field = complex.vertex_distances(
                &[v],
                DistanceOptions { steiner_midpoints: false, truncate_at: Some(4.0 * rho) },
            );
            for u in 0..nv {
                if field.dist[u] < mindist[u] {
                    mindist[u] = field.dist[u];
                }
            }
        }
    }
    if centers.len() < 2 && complex.top_count() > 1 {
        return Err(Error::RhoTooLarge {
            rho,
            centers: centers.len(),
            tops: complex.top_count(),
        });
    }
    centers.sort_unstable();
    debug_assert!(mindist.iter().all(|&d| d <= 4.0 * rho));
    Ok(centers)
}

/// Assign every top simplex to the center nearest to its barycenter (ties
/// to the lower center index), repair stranded components, and certify.
pub fn voronoi_cells(
    complex: &FlatComplex,
    centers: &[usize],
    rho: f64,
    lambda_max: f64,
) -> Result<CellStructure> {
    assert!(!centers.is_empty());
    let nt = complex.top_count();
    // per-center distance fields (needed for the containment radii)
    let fields: Vec<Vec<f64>> = centers
        .iter()
        .map(|&c| {
            let f = complex.vertex_distances(&[c], DistanceOptions::default());
            (0..nt).map(|t| complex.bary_distance(&f, t)).collect()
        })
        .collect();
    let mut cell_of_top = vec![0usize; nt];
    for t in 0..nt {
        let mut best = f64::INFINITY;
        let mut who = 0;
        for (i, field) in fields.iter().enumerate() {
            // strictly closer by the relative margin; ties keep the
            // lower center index
            if field[t] < best * (1.0 - REL_TIE) {
                best = field[t];
                who = i;
            }
        }
        cell_of_top[t] = who;
    }
    repair_connectivity(complex, centers.len(), &mut cell_of_top, &fields);
    // gather cells
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); centers.len()];
    for (t, &c) in cell_of_top.iter().enumerate() {
        members[c].push(t);
    }
    if members.iter().any(|m| m.is_empty()) {
        // a center lost all its simplices to repair; certify what remains
        // by dropping empty cells
        let keep: Vec<usize> = (0..centers.len()).filter(|&i| !members[i].is_empty()).collect();
        let remap: Vec<usize> = {
            let mut r = vec![usize::MAX; centers.len()];
            for (new, &old) in keep.iter().enumerate() {
                r[old] = new;
            }
            r
        };
        let centers2: Vec<usize> = keep.iter().map(|&i| centers[i]).collect();
        for c in cell_of_top.iter_mut() {
            *c = remap[*c];
        }
        let mut structure = certify(complex, &centers2, &cell_of_top, rho, lambda_max)?;
        structure.rho = rho;
        return Ok(structure);
    }
    certify(complex, centers, &cell_of_top, rho, lambda_max)
}

/// Reassign components not containing their cell's core to the nearest
/// adjacent cell until every cell is edge-connected.
fn repair_connectivity(
    complex: &FlatComplex,
    n_cells: usize,
    cell_of_top: &mut [usize],
    fields: &[Vec<f64>],
) {
    let nt = complex.top_count();
    loop {
        // components per cell
        let mut comp = vec![usize::MAX; nt];
        let mut comp_cell = Vec::new();
        let mut comp_tops: Vec<Vec<usize>> = Vec::new();
        for t0 in 0..nt {
            if comp[t0] != usize::MAX {
                continue;
            }
            let cid = comp_tops.len();
            comp[t0] = cid;
            comp_cell.push(cell_of_top[t0]);
            let mut stack = vec![t0];
            let mut tops = vec![t0];
            while let Some(t) = stack.pop() {
                for (nb, _) in complex.dual_adjacency(t) {
                    if comp[nb] == usize::MAX && cell_of_top[nb] == cell_of_top[t] {
                        comp[nb] = cid;
                        stack.push(nb);
                        tops.push(nb);
                    }
                }
            }
            tops.sort_unstable();
            comp_tops.push(tops);
        }
        // core component per cell: the one with a member nearest the center
        let mut core = vec![usize::MAX; n_cells];
        let mut core_key = vec![(f64::INFINITY, usize::MAX); n_cells];
        for (cid, tops) in comp_tops.iter().enumerate() {
            let cell = comp_cell[cid];
            for &t in tops {
                let key = (fields[cell][t], t);
                if key < core_key[cell] {
                    core_key[cell] = key;
                    core[cell] = cid;
                }
            }
        }
        // first stranded component in deterministic order
        let stranded = (0..comp_tops.len())
            .filter(|&cid| core[comp_cell[cid]] != cid)
            .min_by_key(|&cid| comp_tops[cid][0]);
        let Some(cid) = stranded else {
            return;
        };
        let rep = comp_tops[cid][0];
        // adjacent cells of the component
        let mut adjacent = BTreeSet::new();
        for &t in &comp_tops[cid] {
            for (nb, _) in complex.dual_adjacency(t) {
                if cell_of_top[nb] != comp_cell[cid] {
                    adjacent.insert(cell_of_top[nb]);
                }
            }
        }
        let target = adjacent.into_iter().min_by(|&a, &b| {
            let (da, db) = (fields[a][rep], fields[b][rep]);
            if da < db * (1.0 - REL_TIE) {
                std::cmp::Ordering::Less
            } else if db < da * (1.0 - REL_TIE) {
                std::cmp::Ordering::Greater
            } else {
                a.cmp(&b)
            }
        });
        let Some(target) = target else {
            // isolated island (disconnected complex): leave it be
            return;
        };
        for &t in &comp_tops[cid] {
            cell_of_top[t] = target;
        }
    }
}

fn certify(
    complex: &FlatComplex,
    centers: &[usize],
    cell_of_top: &[usize],
    rho: f64,
    lambda_max: f64,
) -> Result<CellStructure> {
    let n = complex.dim();
    let nt = complex.top_count();
    let mut cells = Vec::with_capacity(centers.len());
    let mut worst_cell = 0usize;
    let mut lambda_geo = 1.0f64;
    for (i, &center) in centers.iter().enumerate() {
        let field = complex.vertex_distances(&[center], DistanceOptions::default());
        let mut containment: f64 = 0.0;
        let mut free = f64::INFINITY;
        let mut tops = Vec::new();
        for t in 0..nt {
            let d = complex.bary_distance(&field, t);
            if cell_of_top[t] == i {
                tops.push(t);
                containment = containment.max(d);
            } else {
                free = free.min(d);
            }
        }
        let volume = complex.volume_of(&tops);
        let lam_a = containment / (6.0 * rho);
        let lam_b = if free.is_finite() { 2.0 * rho / free } else { 1.0 };
        let lam = lam_a.max(lam_b).max(1.0);
        if lam > lambda_geo {
            lambda_geo = lam;
            worst_cell = i;
        }
        cells.push(Cell { center, tops, volume, containment_radius: containment, free_radius: free });
    }
    // inflate lambda until the cell-count sandwich holds
    let omega = unit_ball_volumes(n)[n];
    let vol = complex.volume();
    let count = cells.len() as f64;
    let lam_lower = (count * omega * 2.0f64.powi(n as i32) * rho.powi(n as i32) / vol)
        .powf(1.0 / n as f64);
    let lam_upper = (vol / (count * omega * 6.0f64.powi(n as i32) * rho.powi(n as i32)))
        .powf(1.0 / n as f64);
    let lambda = lambda_geo.max(lam_lower).max(lam_upper);
    if lambda > lambda_max {
        return Err(Error::CertificateFailure { cell: worst_cell, needed: lambda, lambda_max });
    }
    // skeleton and adjacency
    let mut skeleton = Vec::new();
    let mut adj_map: std::collections::BTreeMap<(usize, usize), f64> =
        std::collections::BTreeMap::new();
    for f in 0..complex.facet_count() {
        let cofs: Vec<usize> = complex.facet_cofaces(f).collect();
        if cofs.len() == 1 {
            skeleton.push(f);
        } else {
            let (a, b) = (cell_of_top[cofs[0]], cell_of_top[cofs[1]]);
            if a != b {
                skeleton.push(f);
                let key = (a.min(b), a.max(b));
                *adj_map.entry(key).or_insert(0.0) += complex.facet_volume(f);
            }
        }
    }
    let adjacency: Vec<(usize, usize, f64)> =
        adj_map.into_iter().map(|((a, b), v)| (a, b, v)).collect();
    Ok(CellStructure {
        cells,
        rho,
        lambda,
        skeleton,
        adjacency,
        cell_of_top: cell_of_top.to_vec(),
    })
}

impl CellStructure {
    pub fn certificate(&self, complex: &FlatComplex) -> CellCertificate {
        let n = complex.dim() as i32;
        let omega = unit_ball_volumes(complex.dim())[complex.dim()];
        let count = self.cells.len() as f64;
        let lower = count * self.lambda.powi(-n) * omega * 2.0f64.powi(n) * self.rho.powi(n);
        let upper = count * self.lambda.powi(n) * omega * 6.0f64.powi(n) * self.rho.powi(n);
        let vol = complex.volume();
        CellCertificate {
            rho: self.rho,
            lambda: self.lambda,
            n_cells: self.cells.len(),
            volume: vol,
            eq_n_lower: lower,
            eq_n_upper: upper,
            eq_n_holds: lower <= vol && vol <= upper,
            cells: self.cells.clone(),
        }
    }

    /// Skeleton facets between the given cell and everything else
    /// (excluding domain-boundary facets).
    pub fn cell_interface(&self, complex: &FlatComplex, cell: usize) -> Chain {
        let mut chain = Chain::new();
        for &f in &self.skeleton {
            let cofs: Vec<usize> = complex.facet_cofaces(f).collect();
            if cofs.len() == 2 {
                let (a, b) = (self.cell_of_top[cofs[0]], self.cell_of_top[cofs[1]]);
                if (a == cell) != (b == cell) {
                    chain.toggle(f);
                }
            }
        }
        chain
    }
}

/// rho for the auto rule: rho = (vol / (omega_n N_target))^(1/n).
pub fn rho_auto(complex: &FlatComplex, n_target: usize) -> f64 {
    let n = complex.dim();
    let omega = unit_ball_volumes(n)[n];
    (complex.volume() / (omega * n_target as f64)).powf(1.0 / n as f64)
}

/// Discrete radial projection: replace a chain inside the cell (away from
/// the central ball B(center, lambda rho)) by the volume-minimizing chain
/// on the cell boundary with the same mod-2 boundary. The projection
/// Lipschitz bound 36^(n-1) lambda^(2(n-1)) caps the admissible volume
/// growth and is checked on output.
pub fn radial_project(
    complex: &FlatComplex,
    structure: &CellStructure,
    cell_id: usize,
    chain: &Chain,
) -> Result<Chain> {
    let cell = &structure.cells[cell_id];
    let member: BTreeSet<usize> = cell.tops.iter().copied().collect();
    for f in chain.facets() {
        if !complex.facet_cofaces(f).any(|t| member.contains(&t)) {
            return Err(Error::InvalidChain {
                message: format!("facet {f} is not incident to cell {cell_id}"),
            });
        }
    }
    // central-ball test on facet barycenters
    let field = complex.vertex_distances(&[cell.center], DistanceOptions::default());
    let limit = structure.lambda * structure.rho;
    for f in chain.facets() {
        if complex.facet_bary_distance(&field, f) <= limit {
            return Err(Error::TooCentral { cell: cell_id });
        }
    }
    let prescribed = chain_boundary_in_cell(complex, chain);
    let facets = cell_facets(complex, &cell.tops);
    let bd_ridges: BTreeSet<usize> = facets
        .boundary
        .iter()
        .flat_map(|&f| facet_ridges(complex, f))
        .collect();
    if !prescribed.iter().all(|r| bd_ridges.contains(r)) {
        return Err(Error::InvalidChain {
            message: "chain boundary does not lie on the cell boundary".into(),
        });
    }
    let projected = min_boundary_chain(complex, &cell.tops, &prescribed)?;
    let n = complex.dim() as i32;
    let budget = 36.0f64.powi(n - 1)
        * structure.lambda.powi(2 * (n - 1))
        * chain.volume(complex)
        * (1.0 + CERT_REL_TOL);
    let achieved = projected.volume(complex);
    if achieved > budget {
        return Err(Error::ProjectionBudgetExceeded { cell: cell_id, achieved, budget });
    }
    Ok(projected)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{convex_polygon_disk, flat_torus_2d};

    #[test]
    fn pack_torus16_rho_sixteenth() {
        let k = flat_torus_2d(16).unwrap();
        let rho = 1.0 / 16.0;
        let centers = pack_centers(&k, rho, PackOptions::default()).unwrap();
        assert!(
            centers.len() >= 4 && centers.len() <= 64,
            "got {} centers",
            centers.len()
        );
        // maximality: every vertex within 4 rho of some center
        let field = k.vertex_distances(&centers, DistanceOptions::default());
        for v in 0..k.vertex_count() {
            assert!(field.dist[v] <= 4.0 * rho + 1e-12);
        }
    }

    #[test]
    fn pack_single_triangle_one_center() {
        let k = FlatComplex::from_edge_lengths(
            2,
            3,
            vec![vec![0, 1, 2]],
            vec![(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)],
        )
        .unwrap();
        let centers = pack_centers(&k, 1.0, PackOptions::default()).unwrap();
        assert_eq!(centers.len(), 1);
    }

    #[test]
    fn pack_rho_too_small_cap() {
        let k = flat_torus_2d(8).unwrap();
        let err = pack_centers(&k, 1e-6, PackOptions { center_cap: 10 }).unwrap_err();
        assert!(matches!(err, Error::RhoTooSmall { .. }));
    }

    #[test]
    fn voronoi_torus_certificate() {
        let k = flat_torus_2d(16).unwrap();
        let rho = 1.0 / 8.0;
        let centers = pack_centers(&k, rho, PackOptions::default()).unwrap();
        let cs = voronoi_cells(&k, &centers, rho, 4.0).unwrap();
        // partition
        let total: usize = cs.cells.iter().map(|c| c.tops.len()).sum();
        assert_eq!(total, k.top_count());
        // ball containments with the certified lambda
        for cell in &cs.cells {
            assert!(cell.containment_radius <= 6.0 * rho * cs.lambda + 1e-12);
            assert!(cell.free_radius >= 2.0 * rho / cs.lambda - 1e-12);
        }
        let cert = cs.certificate(&k);
        assert!(cert.eq_n_holds, "{cert:?}");
    }

    #[test]
    fn voronoi_single_center() {
        let k = flat_torus_2d(8).unwrap();
        let cs = voronoi_cells(&k, &[0], 0.5, 4.0).unwrap();
        assert_eq!(cs.cells.len(), 1);
        assert_eq!(cs.cells[0].tops.len(), k.top_count());
        assert!(cs.skeleton.is_empty());
    }

    #[test]
    fn voronoi_tie_breaks_to_lower_index() {
        // two centers symmetric on a torus: ties go to cell 0
        let k = flat_torus_2d(8).unwrap();
        let c0 = 0;
        let c1 = 4 * 8 + 4; // (4, 4): diagonal opposite
        let cs = voronoi_cells(&k, &[c0, c1], 1.0 / 8.0, 4.0).unwrap();
        assert_eq!(cs.cells.len(), 2);
        // symmetric halves: cell 0 gets at least half by the tie rule
        assert!(cs.cells[0].tops.len() >= cs.cells[1].tops.len());
        // cells are edge-connected
        for cell in &cs.cells {
            let mut seen = vec![false; k.top_count()];
            let mut stack = vec![cell.tops[0]];
            seen[cell.tops[0]] = true;
            let member: BTreeSet<usize> = cell.tops.iter().copied().collect();
            let mut count = 1;
            while let Some(t) = stack.pop() {
                for (nb, _) in k.dual_adjacency(t) {
                    if member.contains(&nb) && !seen[nb] {
                        seen[nb] = true;
                        count += 1;
                        stack.push(nb);
                    }
                }
            }
            assert_eq!(count, cell.tops.len());
        }
    }

    #[test]
    fn radial_project_identity_on_boundary_facet() {
        let k = convex_polygon_disk(12).unwrap();
        let cs = voronoi_cells(&k, &[0], 1.0, 4.0).unwrap();
        // one cell: whole disk; chain = one outer boundary edge, away from
        // the center if lambda rho is small enough
        let cs = CellStructure { rho: 0.05, ..cs };
        let f = k.boundary_facets()[0];
        let chain = Chain::from_facets([f]);
        let projected = radial_project(&k, &cs, 0, &chain).unwrap();
        assert_eq!(projected, chain);
    }

    #[test]
    fn radial_project_too_central() {
        let k = convex_polygon_disk(12).unwrap();
        let centers = vec![0usize];
        let cs = voronoi_cells(&k, &centers, 1.0, 4.0).unwrap();
        // an interior spoke edge touches the center: with rho = 1 the ball
        // covers everything
        let spoke = k.facet_id(&[0, 1]).unwrap();
        let chain = Chain::from_facets([spoke]);
        let err = radial_project(&k, &cs, 0, &chain).unwrap_err();
        assert!(matches!(err, Error::TooCentral { .. }));
    }

    #[test]
    fn radial_project_near_boundary_chain_budget() {
        // disk cell; chain = short interior path near the boundary joining
        // two boundary vertices; projection lands on the boundary within
        // the Lipschitz budget
        let k = convex_polygon_disk(12).unwrap();
        let cs = voronoi_cells(&k, &[0], 1.0, 4.0).unwrap();
        let cs = CellStructure { rho: 0.1, ..cs };
        // interior edge between consecutive rim vertices is the rim chord;
        // take the spoke-free path: chain of one rim edge's two neighbors
        let rim_edge = k.facet_id(&[1, 2]).unwrap();
        let chain = Chain::from_facets([rim_edge]);
        let projected = radial_project(&k, &cs, 0, &chain).unwrap();
        let budget = 36.0 * cs.lambda.powi(2) * chain.volume(&k) * (1.0 + 1e-6);
        assert!(projected.volume(&k) <= budget);
        assert_eq!(
            chain_boundary_in_cell(&k, &projected),
            chain_boundary_in_cell(&k, &chain)
        );
    }

    #[test]
    fn rho_auto_formula() {
        let k = flat_torus_2d(8).unwrap();
        let rho = rho_auto(&k, 64);
        let want = (1.0 / (std::f64::consts::PI * 64.0)).sqrt();
        assert!((rho - want).abs() < 1e-12);
    }
}
