//! Mod-2 (n-1)-chains: sets of facets with the usual boundary operator.

use super::FlatComplex;
use crate::geom::KahanSum;
use std::collections::BTreeSet;

/// A mod-2 chain of (n-1)-faces; presence means coefficient 1.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Chain {
    facets: BTreeSet<usize>,
}

impl Chain {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_facets(facets: impl IntoIterator<Item = usize>) -> Self {
        Chain { facets: facets.into_iter().collect() }
    }

    pub fn facets(&self) -> impl Iterator<Item = usize> + '_ {
        self.facets.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.facets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facets.is_empty()
    }

    pub fn contains(&self, f: usize) -> bool {
        self.facets.contains(&f)
    }

    pub fn toggle(&mut self, f: usize) {
        if !self.facets.insert(f) {
            self.facets.remove(&f);
        }
    }

    /// Symmetric difference (mod-2 sum).
    pub fn add(&self, other: &Chain) -> Chain {
        let mut out = self.clone();
        for &f in &other.facets {
            out.toggle(f);
        }
        out
    }

    /// Total (n-1)-volume, accumulated in index order.
    pub fn volume(&self, complex: &FlatComplex) -> f64 {
        let mut acc = KahanSum::new();
        for &f in &self.facets {
            acc.add(complex.facet_volume(f));
        }
        acc.value()
    }

    /// Mod-2 boundary: the set of (n-2)-faces incident to an odd number of
    /// chain facets. For n=2 these are vertex ids, for n=3 edge ids.
    pub fn boundary(&self, complex: &FlatComplex) -> BTreeSet<usize> {
        let mut odd = BTreeSet::new();
        for &f in &self.facets {
            let verts = complex.facet(f);
            match complex.dim() {
                2 => {
                    for &v in verts {
                        toggle(&mut odd, v);
                    }
                }
                3 => {
                    for i in 0..3 {
                        for j in (i + 1)..3 {
                            let e = complex
                                .edge_id(verts[i], verts[j])
                                .expect("facet edges exist");
                            toggle(&mut odd, e);
                        }
                    }
                }
                _ => unreachable!(),
            }
        }
        odd
    }

    pub fn is_cycle(&self, complex: &FlatComplex) -> bool {
        self.boundary(complex).is_empty()
    }
}

fn toggle(set: &mut BTreeSet<usize>, x: usize) {
    if !set.insert(x) {
        set.remove(&x);
    }
}

/// Boundary of a set of top simplices: facets incident to an odd number of
/// members (for whole-complex subsets this is the topological boundary).
pub fn simplex_set_boundary(complex: &FlatComplex, tops: &[usize]) -> Chain {
    let mut chain = Chain::new();
    for &t in tops {
        for &f in complex.top_facet_ids(t) {
            chain.toggle(f);
        }
    }
    chain
}

#[cfg(test)]
mod tests {
    use super::super::tests::unit_square;
    use super::*;

    #[test]
    fn boundary_of_top_boundary_is_zero() {
        let k = unit_square();
        // all 3 facets (edges) of triangle 0
        let chain = Chain::from_facets(k.top_facet_ids(0).iter().copied());
        assert!(chain.boundary(&k).is_empty());
    }

    #[test]
    fn single_interior_edge_has_two_endpoint_boundary() {
        let k = unit_square();
        // the diagonal (0, 2) is interior
        let f = k.facet_id(&[0, 2]).unwrap();
        let chain = Chain::from_facets([f]);
        let b = chain.boundary(&k);
        assert_eq!(b.into_iter().collect::<Vec<_>>(), vec![0, 2]);
    }

    #[test]
    fn boundary_of_boundary_always_zero_small() {
        let k = unit_square();
        // every subset of facets: n=2 boundary lives on vertices, so
        // del o del means: boundary of a simplex-set boundary chain is empty
        for mask in 0..(1 << k.top_count()) {
            let tops: Vec<usize> =
                (0..k.top_count()).filter(|t| mask & (1 << t) != 0).collect();
            let chain = simplex_set_boundary(&k, &tops);
            assert!(chain.is_cycle(&k) || !k.boundary_facets().is_empty());
        }
    }

    #[test]
    fn chain_volume_sums_facet_volumes(){
        let k = unit_square();
        let f = k.facet_id(&[0, 2]).unwrap();
        let chain = Chain::from_facets([f]);
        assert!((chain.volume(&k) - 2.0f64.sqrt()).abs() < 1e-12);
    }
}
