//! Max-flow / min-cut on small graphs with real capacities, and the
//! volume-minimizing chains with prescribed mod-2 boundary built on it.

use crate::complex::{Chain, FlatComplex};
use crate::{Error, Result};
use std::collections::{BTreeSet, HashMap, VecDeque};

/// Edmonds-Karp max flow. Node count fixed up front; parallel edges fine.
pub struct MaxFlow {
    adj: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<f64>,
}

impl MaxFlow {
    pub fn new(nodes: usize) -> Self {
        MaxFlow { adj: vec![Vec::new(); nodes], to: Vec::new(), cap: Vec::new() }
    }

    /// Undirected edge of the given capacity.
    pub fn add_edge(&mut self, u: usize, v: usize, capacity: f64) {
        debug_assert!(capacity >= 0.0);
        self.adj[u].push(self.to.len());
        self.to.push(v);
        self.cap.push(capacity);
        self.adj[v].push(self.to.len());
        self.to.push(u);
        self.cap.push(capacity);
    }

    /// Runs max flow from s to t; returns the flow value and the set of
    /// nodes on the source side of a minimum cut.
    pub fn min_cut(&mut self, s: usize, t: usize) -> (f64, Vec<bool>) {
        let n = self.adj.len();
        let mut flow = 0.0;
        loop {
            // BFS for a shortest augmenting path
            let mut parent_edge = vec![usize::MAX; n];
            let mut seen = vec![false; n];
            seen[s] = true;
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                if u == t {
                    break;
                }
                for &e in &self.adj[u] {
                    let v = self.to[e];
                    if !seen[v] && self.cap[e] > 0.0 {
                        seen[v] = true;
                        parent_edge[v] = e;
                        queue.push_back(v);
                    }
                }
            }
            if !seen[t] {
                let mut source_side = vec![false; n];
                let mut stack = vec![s];
                source_side[s] = true;
                while let Some(u) = stack.pop() {
                    for &e in &self.adj[u] {
                        let v = self.to[e];
                        if !source_side[v] && self.cap[e] > 0.0 {
                            source_side[v] = true;
                            stack.push(v);
                        }
                    }
                }
                return (flow, source_side);
            }
            let mut bottleneck = f64::INFINITY;
            let mut v = t;
            while v != s {
                let e = parent_edge[v];
                bottleneck = bottleneck.min(self.cap[e]);
                v = self.to[e ^ 1];
            }
            let mut v = t;
            while v != s {
                let e = parent_edge[v];
                self.cap[e] -= bottleneck;
                self.cap[e ^ 1] += bottleneck;
                v = self.to[e ^ 1];
            }
            flow += bottleneck;
        }
    }
}

/// The facets of a cell (a set of top simplices), separated into interior
/// facets (both cofaces in the cell) and boundary facets.
pub struct CellFacets {
    pub in_cell: Vec<bool>,
    pub interior: Vec<usize>,
    pub boundary: Vec<usize>,
}

pub fn cell_facets(complex: &FlatComplex, cell_tops: &[usize]) -> CellFacets {
    let mut member = vec![false; complex.top_count()];
    for &t in cell_tops {
        member[t] = true;
    }
    let mut seen = vec![false; complex.facet_count()];
    let mut interior = Vec::new();
    let mut boundary = Vec::new();
    for &t in cell_tops {
        for &f in complex.top_facet_ids(t) {
            if seen[f] {
                continue;
            }
            seen[f] = true;
            let inside = complex.facet_cofaces(f).filter(|&c| member[c]).count();
            if inside == 2 {
                interior.push(f);
            } else {
                boundary.push(f);
            }
        }
    }
    CellFacets { in_cell: member, interior, boundary }
}

/// Ridges of a facet: vertex ids for n=2, edge ids for n=3.
pub fn facet_ridges(complex: &FlatComplex, f: usize) -> Vec<usize> {
    let verts = complex.facet(f);
    match complex.dim() {
        2 => verts.to_vec(),
        3 => {
            let mut out = Vec::with_capacity(3);
            for i in 0..3 {
                for j in (i + 1)..3 {
                    out.push(complex.edge_id(verts[i], verts[j]).expect("facet edge"));
                }
            }
            out
        }
        _ => unreachable!(),
    }
}

/// Boundary-region structure of a cell: connected components of the
/// boundary facets after removing adjacency across the prescribed ridges,
/// with the list of "must differ" constraints the prescription induces.
struct Regions {
    /// region id per boundary facet (parallel to `boundary`)
    region_of: HashMap<usize, usize>,
    region_count: usize,
    /// (region a, region b) must have different colors
    differ: Vec<(usize, usize)>,
}

fn boundary_regions(
    complex: &FlatComplex,
    facets: &CellFacets,
    prescribed: &BTreeSet<usize>,
) -> Result<Regions> {
    // ridge -> incident boundary facets
    let mut by_ridge: HashMap<usize, Vec<usize>> = HashMap::new();
    for &f in &facets.boundary {
        for r in facet_ridges(complex, f) {
            by_ridge.entry(r).or_default().push(f);
        }
    }
    for &r in prescribed {
        match by_ridge.get(&r) {
            Some(fs) if fs.len() == 2 => {}
            _ => {
                return Err(Error::NonSeparatingBoundary);
            }
        }
    }
    // union-find over boundary facets, merging across non-prescribed ridges
    let ids: Vec<usize> = facets.boundary.clone();
    let index: HashMap<usize, usize> = ids.iter().enumerate().map(|(i, &f)| (f, i)).collect();
    let mut parent: Vec<usize> = (0..ids.len()).collect();
    fn find(parent: &mut Vec<usize>, x: usize) -> usize {
        let mut root = x;
        while parent[root] != root {
            root = parent[root];
        }
        let mut cur = x;
        while parent[cur] != root {
            let next = parent[cur];
            parent[cur] = root;
            cur = next;
        }
        root
    }
    for (r, fs) in &by_ridge {
        if prescribed.contains(r) || fs.len() != 2 {
            continue;
        }
        let a = find(&mut parent, index[&fs[0]]);
        let b = find(&mut parent, index[&fs[1]]);
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut region_ids: HashMap<usize, usize> = HashMap::new();
    let mut region_of = HashMap::new();
    for (i, &f) in ids.iter().enumerate() {
        let root = find(&mut parent, i);
        let next = region_ids.len();
        let rid = *region_ids.entry(root).or_insert(next);
        region_of.insert(f, rid);
    }
    let mut differ = Vec::new();
    for &r in prescribed {
        let fs = &by_ridge[&r];
        differ.push((region_of[&fs[0]], region_of[&fs[1]]));
    }
    Ok(Regions { region_of, region_count: region_ids.len(), differ })
}

/// All consistent 2-colorings of the regions (colors of one component are
/// determined up to a global flip; every combination over components is
/// enumerated). Errors when the constraints are unsatisfiable.
fn colorings(regions: &Regions) -> Result<Vec<Vec<bool>>> {
    let n = regions.region_count;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(a, b) in &regions.differ {
        if a == b {
            return Err(Error::NonSeparatingBoundary);
        }
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut comp = vec![usize::MAX; n];
    let mut base = vec![false; n];
    let mut comp_count = 0;
    for start in 0..n {
        if comp[start] != usize::MAX {
            continue;
        }
        comp[start] = comp_count;
        base[start] = false;
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if comp[v] == usize::MAX {
                    comp[v] = comp_count;
                    base[v] = !base[u];
                    queue.push_back(v);
                } else if base[v] == base[u] {
                    return Err(Error::NonSeparatingBoundary);
                }
            }
        }
        comp_count += 1;
    }
    if comp_count > 12 {
        return Err(Error::NonSeparatingBoundary);
    }
    let mut out = Vec::with_capacity(1 << comp_count);
    for mask in 0usize..(1 << comp_count) {
        let coloring: Vec<bool> = (0..n).map(|r| base[r] ^ ((mask >> comp[r]) & 1 == 1)).collect();
        out.push(coloring);
    }
    Ok(out)
}

/// Volume-minimizing mod-2 (n-1)-chain inside the cell with the
/// prescribed (n-2)-boundary on the cell's boundary facets, via a minimum
/// cut in the cell's dual graph (face weights = face volumes).
/// Exact for separating prescriptions; NonSeparatingBoundary otherwise.
pub fn min_chain_with_boundary(
    complex: &FlatComplex,
    cell_tops: &[usize],
    prescribed: &BTreeSet<usize>,
) -> Result<Chain> {
    let facets = cell_facets(complex, cell_tops);
    if facets.boundary.is_empty() && !prescribed.is_empty() {
        return Err(Error::NonSeparatingBoundary);
    }
    let regions = boundary_regions(complex, &facets, prescribed)?;
    let all_colorings = colorings(&regions)?;
    let top_index: HashMap<usize, usize> =
        cell_tops.iter().enumerate().map(|(i, &t)| (t, i)).collect();
    let mut best: Option<(f64, Chain)> = None;
    for coloring in &all_colorings {
        // nodes: cell simplices, then s = n, t = n + 1
        let n = cell_tops.len();
        let mut net = MaxFlow::new(n + 2);
        for &f in &facets.interior {
            let mut cofs = complex.facet_cofaces(f);
            let a = top_index[&cofs.next().unwrap()];
            let b = top_index[&cofs.next().unwrap()];
            net.add_edge(a, b, complex.facet_volume(f));
        }
        for &f in &facets.boundary {
            let owner = complex
                .facet_cofaces(f)
                .find(|c| facets.in_cell[*c])
                .expect("boundary facet has a cell coface");
            let terminal = if coloring[regions.region_of[&f]] { n + 1 } else { n };
            net.add_edge(top_index[&owner], terminal, complex.facet_volume(f));
        }
        let (_, source_side) = net.min_cut(n, n + 1);
        let mut chain = Chain::new();
        for &f in &facets.interior {
            let mut cofs = complex.facet_cofaces(f);
            let a = top_index[&cofs.next().unwrap()];
            let b = top_index[&cofs.next().unwrap()];
            if source_side[a] != source_side[b] {
                chain.toggle(f);
            }
        }
        for &f in &facets.boundary {
            let owner = complex
                .facet_cofaces(f)
                .find(|c| facets.in_cell[*c])
                .unwrap();
            let color_side = !coloring[regions.region_of[&f]]; // true = source color
            if source_side[top_index[&owner]] != color_side {
                chain.toggle(f);
            }
        }
        // the chain realizes the prescription exactly or the coloring is bad
        if chain_boundary_in_cell(complex, &chain) != *prescribed {
            continue;
        }
        let vol = chain.volume(complex);
        match &best {
            Some((bv, _)) if *bv <= vol => {}
            _ => best = Some((vol, chain)),
        }
    }
    best.map(|(_, c)| c).ok_or(Error::NonSeparatingBoundary)
}

/// Volume-minimizing chain supported on the cell's boundary facets with
/// the prescribed (n-2)-boundary: regions are chosen whole.
pub fn min_boundary_chain(
    complex: &FlatComplex,
    cell_tops: &[usize],
    prescribed: &BTreeSet<usize>,
) -> Result<Chain> {
    let facets = cell_facets(complex, cell_tops);
    let regions = boundary_regions(complex, &facets, prescribed)?;
    let all_colorings = colorings(&regions)?;
    let mut best: Option<(f64, Chain)> = None;
    for coloring in &all_colorings {
        let mut chain = Chain::new();
        for &f in &facets.boundary {
            if coloring[regions.region_of[&f]] {
                chain.toggle(f);
            }
        }
        if chain_boundary_in_cell(complex, &chain) != *prescribed {
            continue;
        }
        let vol = chain.volume(complex);
        match &best {
            Some((bv, _)) if *bv <= vol => {}
            _ => best = Some((vol, chain)),
        }
    }
    best.map(|(_, c)| c).ok_or(Error::NonSeparatingBoundary)
}

/// Mod-2 boundary of a chain as a ridge set.
pub fn chain_boundary_in_cell(complex: &FlatComplex, chain: &Chain) -> BTreeSet<usize> {
    let mut odd = BTreeSet::new();
    for f in chain.facets() {
        for r in facet_ridges(complex, f) {
            if !odd.insert(r) {
                odd.remove(&r);
            }
        }
    }
    odd
}

/// Exhaustive minimum over all chains on the cell's facets with the
/// prescribed boundary. Exponential; only for small cells (oracle).
pub fn brute_force_min_chain(
    complex: &FlatComplex,
    cell_tops: &[usize],
    prescribed: &BTreeSet<usize>,
) -> Option<(f64, Chain)> {
    let facets = cell_facets(complex, cell_tops);
    let all: Vec<usize> = facets
        .interior
        .iter()
        .chain(facets.boundary.iter())
        .copied()
        .collect();
    assert!(all.len() <= 22, "brute force limited to 22 facets");
    let mut best: Option<(f64, Chain)> = None;
    for mask in 0u64..(1 << all.len()) {
        let chain = Chain::from_facets(
            all.iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &f)| f),
        );
        if chain_boundary_in_cell(complex, &chain) != *prescribed {
            continue;
        }
        let vol = chain.volume(complex);
        match &best {
            Some((bv, _)) if *bv <= vol => {}
            _ => best = Some((vol, chain)),
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{convex_polygon_disk, flat_torus_2d};

    #[test]
    fn max_flow_simple_bottleneck() {
        let mut net = MaxFlow::new(4);
        net.add_edge(0, 1, 3.0);
        net.add_edge(1, 2, 1.0);
        net.add_edge(2, 3, 3.0);
        let (flow, side) = net.min_cut(0, 3);
        assert!((flow - 1.0).abs() < 1e-12);
        assert!(side[0] && side[1] && !side[2] && !side[3]);
    }

    #[test]
    fn empty_boundary_gives_empty_chain() {
        let k = flat_torus_2d(4).unwrap();
        let cell: Vec<usize> = (0..8).collect();
        let chain = min_chain_with_boundary(&k, &cell, &BTreeSet::new()).unwrap();
        assert!(chain.is_empty());
    }

    #[test]
    fn single_boundary_facet_prescription() {
        // prescribing the boundary of one boundary facet recovers a chain
        // no more expensive than that facet
        let k = convex_polygon_disk(6).unwrap();
        let cell: Vec<usize> = (0..k.top_count()).collect();
        let f = k.boundary_facets()[0];
        let prescribed: BTreeSet<usize> = facet_ridges(&k, f).into_iter().collect();
        let chain = min_chain_with_boundary(&k, &cell, &prescribed).unwrap();
        assert!(chain.volume(&k) <= k.facet_volume(f) + 1e-12);
        assert_eq!(chain_boundary_in_cell(&k, &chain), prescribed);
    }

    #[test]
    fn matches_brute_force_on_disk() {
        let k = convex_polygon_disk(5).unwrap();
        let cell: Vec<usize> = (0..k.top_count()).collect();
        // prescribe two boundary vertices: the min chain is the cheaper arc
        // of interior/boundary edges joining them
        let b0 = k.boundary_facets()[0];
        let b2 = k.boundary_facets()[2];
        let mut prescribed = BTreeSet::new();
        for f in [b0, b2] {
            for r in facet_ridges(&k, f) {
                if !prescribed.insert(r) {
                    prescribed.remove(&r);
                }
            }
        }
        // prescribed = symmetric difference of endpoints: 2 or 4 vertices
        let ours = min_chain_with_boundary(&k, &cell, &prescribed).unwrap();
        let (bv, _) = brute_force_min_chain(&k, &cell, &prescribed).unwrap();
        assert!(
            (ours.volume(&k) - bv).abs() <= 1e-9 * (1.0 + bv),
            "mincut {} vs brute {}",
            ours.volume(&k),
            bv
        );
    }
}
