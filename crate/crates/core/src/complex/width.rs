//! PL Morse functions and their width profiles.
//!
//! The width of f is sup_t vol_{n-1}(f^{-1}(t)). Per simplex the slice
//! volume is a polynomial of degree <= n-1 between consecutive vertex
//! values, so the global profile is piecewise polynomial with breakpoints
//! at the vertex values. The profile is assembled by a sweep over the
//! breakpoints that maintains the running polynomial sum in a basis
//! centered at the current interval start; each interval is then maximized
//! in closed form.

use super::slice::{simplex_profile, slice_simplex};
use super::FlatComplex;
use crate::geom::{KahanSum, Poly2};
use crate::{Error, Result, PERTURB_FACTOR, REGULAR_FACTOR};
use std::sync::Arc;

/// A PL Morse function: one value per vertex, extended linearly on each
/// simplex, values pairwise distinct.
#[derive(Clone, Debug)]
pub struct PlMorse {
    pub complex: Arc<FlatComplex>,
    pub values: Vec<f64>,
}

impl PlMorse {
    /// Validates pairwise distinct values.
    pub fn new(complex: Arc<FlatComplex>, values: Vec<f64>) -> Result<Self> {
        assert_eq!(values.len(), complex.vertex_count());
        let mut sorted = values.clone();
        sorted.sort_by(f64::total_cmp);
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::ValueCollision { retries: 0 });
        }
        Ok(PlMorse { complex, values })
    }

    /// Builds a PL Morse function from possibly colliding raw values by
    /// adding index-ordered offsets of magnitude below
    /// `PERTURB_FACTOR * range`; retries with larger quanta up to 3 times.
    pub fn perturbed(complex: Arc<FlatComplex>, raw: Vec<f64>) -> Result<Self> {
        let lo = raw.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let range = (hi - lo).max(f64::MIN_POSITIVE);
        let n = raw.len().max(2) as f64;
        for retry in 0..3 {
            let quantum = PERTURB_FACTOR * range / n * 10f64.powi(retry as i32 * 2);
            let values: Vec<f64> = raw
                .iter()
                .enumerate()
                .map(|(i, &v)| v + quantum * (i + 1) as f64)
                .collect();
            match Self::new(complex.clone(), values) {
                Ok(f) => return Ok(f),
                Err(_) => continue,
            }
        }
        Err(Error::ValueCollision { retries: 3 })
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Total (n-1)-volume of the level set at `t`, summed directly over all
    /// simplices (independent of the profile machinery).
    pub fn level_volume(&self, t: f64) -> f64 {
        level_volume(&self.complex, &self.values, t)
    }

    /// n-volume of the sublevel set {f <= t}.
    pub fn sublevel_volume(&self, t: f64) -> f64 {
        let k = &self.complex;
        let mut acc = KahanSum::new();
        for s in 0..k.top_count() {
            let top = k.top(s);
            let vals: Vec<f64> = top.iter().map(|&v| self.values[v]).collect();
            acc.add(super::refine::below_volume(k.realization(s), &vals, t));
        }
        acc.value()
    }

    /// Nudge `t` to a regular value: one differing from every vertex value
    /// by more than REGULAR_FACTOR times the value range. Returns the
    /// nudged value and whether a nudge happened.
    pub fn snap_regular(&self, t: f64) -> (f64, bool) {
        snap_regular(&self.values, t)
    }

    pub fn width_profile(&self) -> WidthProfile {
        width_profile(&self.complex, &self.values)
    }
}

/// Level volume for arbitrary vertex values (not necessarily Morse).
pub(crate) fn level_volume(complex: &FlatComplex, values: &[f64], t: f64) -> f64 {
    let mut acc = KahanSum::new();
    for s in 0..complex.top_count() {
        let top = complex.top(s);
        let vals: Vec<f64> = top.iter().map(|&v| values[v]).collect();
        acc.add(slice_simplex(complex.realization(s), &vals, t).0);
    }
    acc.value()
}

pub(crate) fn snap_regular(values: &[f64], t: f64) -> (f64, bool) {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let eps = REGULAR_FACTOR * (hi - lo).max(f64::MIN_POSITIVE);
    let mut t = t;
    let mut nudged = false;
    // a couple of passes in case the nudge lands next to another value
    for _ in 0..4 {
        let mut clear = true;
        for &v in values {
            if (t - v).abs() <= eps {
                t = v + 2.0 * eps;
                nudged = true;
                clear = false;
            }
        }
        if clear {
            break;
        }
    }
    (t, nudged)
}

/// Piecewise-polynomial level-volume profile with its supremum.
#[derive(Clone, Debug)]
pub struct WidthProfile {
    /// Sorted distinct vertex values.
    pub breakpoints: Vec<f64>,
    /// `polys[i]` describes the level volume on `[breakpoints[i],
    /// breakpoints[i+1]]` as a polynomial in `t - breakpoints[i]`.
    pub polys: Vec<Poly2>,
    /// Supremum of the level volume over all t.
    pub width: f64,
    /// A value of t attaining the supremum (first one in sweep order).
    pub argmax: f64,
}

impl WidthProfile {
    /// Evaluate the profile polynomial at `t` (0 outside the value range).
    pub fn eval(&self, t: f64) -> f64 {
        let n = self.breakpoints.len();
        if n < 2 || t < self.breakpoints[0] || t > self.breakpoints[n - 1] {
            return 0.0;
        }
        let i = match self.breakpoints.binary_search_by(|b| b.total_cmp(&t)) {
            Ok(i) => i.min(n - 2),
            Err(i) => i - 1,
        };
        self.polys[i].eval(t - self.breakpoints[i])
    }
}

pub(crate) fn width_profile(complex: &FlatComplex, values: &[f64]) -> WidthProfile {
    let all: Vec<usize> = (0..complex.top_count()).collect();
    width_profile_over(complex, values, &all)
}

/// Maximum level-set volume restricted to the given top simplices.
pub(crate) fn width_over_tops(complex: &FlatComplex, values: &[f64], tops: &[usize]) -> f64 {
    width_profile_over(complex, values, tops).width
}

pub(crate) fn width_profile_over(
    complex: &FlatComplex,
    values: &[f64],
    tops: &[usize],
) -> WidthProfile {
    let mut breakpoints: Vec<f64> = tops
        .iter()
        .flat_map(|&t| complex.top(t).iter().map(|&v| values[v]))
        .collect();
    breakpoints.sort_by(f64::total_cmp);
    breakpoints.dedup();
    if breakpoints.len() < 2 {
        return WidthProfile {
            breakpoints,
            polys: Vec::new(),
            width: 0.0,
            argmax: values.first().copied().unwrap_or(0.0),
        };
    }
    let idx_of = |value: f64| -> usize {
        breakpoints
            .binary_search_by(|b| b.total_cmp(&value))
            .expect("interval endpoints are vertex values")
    };
    // events[i]: polynomials starting / ending at breakpoint i. A starting
    // polynomial is already centered at breakpoints[i]; an ending one is
    // re-centered on removal.
    let mut starts: Vec<Vec<Poly2>> = vec![Vec::new(); breakpoints.len()];
    let mut ends: Vec<Vec<(f64, Poly2)>> = vec![Vec::new(); breakpoints.len()];
    for &s in tops {
        let top = complex.top(s);
        let vals: Vec<f64> = top.iter().map(|&v| values[v]).collect();
        for lp in simplex_profile(complex.realization(s), &vals) {
            starts[idx_of(lp.a)].push(lp.poly);
            ends[idx_of(lp.b)].push((lp.a, lp.poly));
        }
    }
    let mut polys = Vec::with_capacity(breakpoints.len() - 1);
    let mut running = Poly2::default();
    let mut width = 0.0f64;
    let mut argmax = breakpoints[0];
    for i in 0..breakpoints.len() {
        if i > 0 {
            running = running.shift(breakpoints[i] - breakpoints[i - 1]);
        }
        for (a, poly) in &ends[i] {
            running.sub_assign(&poly.shift(breakpoints[i] - a));
        }
        for poly in &starts[i] {
            running.add_assign(poly);
        }
        if i + 1 < breakpoints.len() {
            let span = breakpoints[i + 1] - breakpoints[i];
            let (u, v) = running.max_on(span);
            if v > width {
                width = v;
                argmax = breakpoints[i] + u;
            }
            polys.push(running);
        }
    }
    WidthProfile { breakpoints, polys, width, argmax }
}

#[cfg(test)]
mod tests {
    use super::super::tests::unit_square;
    use super::*;
    use crate::generators::{flat_torus_2d, flat_torus_3d};

    fn x_sweep_square() -> PlMorse {
        let k = Arc::new(unit_square());
        // vertices 0=(0,0) 1=(1,0) 2=(1,1) 3=(0,1); f = x + tiny offsets
        let raw = vec![0.0, 1.0, 1.0, 0.0];
        PlMorse::perturbed(k, raw).unwrap()
    }

    #[test]
    fn unit_square_x_sweep_width_is_one() {
        let f = x_sweep_square();
        let profile = f.width_profile();
        assert!(
            (profile.width - 1.0).abs() < 1e-6,
            "width = {}",
            profile.width
        );
    }

    #[test]
    fn width_attained_strictly_inside_range() {
        let f = x_sweep_square();
        let profile = f.width_profile();
        assert!(profile.argmax > f.min_value());
        assert!(profile.argmax < f.max_value());
        // slices vanish at the global extrema
        assert!(f.level_volume(f.min_value()) < 1e-9);
    }

    #[test]
    fn width_dominates_samples() {
        let k = Arc::new(flat_torus_2d(6).unwrap());
        let raw: Vec<f64> = (0..k.vertex_count())
            .map(|v| {
                let i = (v / 6) as f64;
                let j = (v % 6) as f64;
                (i * 0.17).sin() + 0.3 * (j * 0.11).cos()
            })
            .collect();
        let f = PlMorse::perturbed(k, raw).unwrap();
        let profile = f.width_profile();
        let lo = f.min_value();
        let hi = f.max_value();
        for i in 0..1000 {
            let t = lo + (hi - lo) * (i as f64 + 0.5) / 1000.0;
            let lv = f.level_volume(t);
            assert!(
                profile.width >= lv - 1e-9,
                "width {} < sample {} at t={}",
                profile.width,
                lv,
                t
            );
            // profile evaluation agrees with the direct sum
            assert!(
                (profile.eval(t) - lv).abs() <= 1e-9 * lv.max(1.0),
                "profile {} vs direct {}",
                profile.eval(t),
                lv
            );
        }
    }

    #[test]
    fn strip_sweep_width_is_one() {
        // torus k=8 cut open along x=0: a cylinder strip with wrapped
        // vertical edges, f ~ x. Lengths must be given intrinsically (the
        // cylinder has no flat planar embedding).
        let kgrid = 8usize;
        let h = 1.0 / kgrid as f64;
        let at = |i: usize, j: usize| i * kgrid + (j % kgrid);
        let mut tops = Vec::new();
        let mut edges = std::collections::HashMap::new();
        let mut add = |a: usize, b: usize, len: f64| {
            edges.entry([a.min(b), a.max(b)]).or_insert(len);
        };
        for i in 0..kgrid {
            for j in 0..kgrid {
                let (a, b, c, d) = (at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1));
                tops.push(vec![a, b, c]);
                tops.push(vec![a, c, d]);
                add(a, b, h);
                add(b, c, h);
                add(c, d, h);
                add(a, d, h);
                add(a, c, h * 2.0f64.sqrt());
            }
        }
        let edge_vec: Vec<(usize, usize, f64)> = {
            let mut v: Vec<_> = edges.into_iter().map(|(e, l)| (e[0], e[1], l)).collect();
            v.sort_by_key(|&(u, v, _)| (u, v));
            v
        };
        let k = Arc::new(
            FlatComplex::from_edge_lengths(2, (kgrid + 1) * kgrid, tops, edge_vec).unwrap(),
        );
        let raw: Vec<f64> = (0..k.vertex_count())
            .map(|v| (v / kgrid) as f64 * h)
            .collect();
        let f = PlMorse::perturbed(k, raw).unwrap();
        let profile = f.width_profile();
        assert!(
            (profile.width - 1.0).abs() < 1e-6,
            "strip width = {}",
            profile.width
        );
    }

    #[test]
    fn sublevel_volume_monotone_and_exhaustive() {
        let k = Arc::new(flat_torus_3d(3).unwrap());
        let raw: Vec<f64> = (0..k.vertex_count()).map(|v| (v as f64 * 0.37).sin()).collect();
        let f = PlMorse::perturbed(k.clone(), raw).unwrap();
        let lo = f.min_value();
        let hi = f.max_value();
        assert!(f.sublevel_volume(lo - 0.1).abs() < 1e-12);
        assert!((f.sublevel_volume(hi + 0.1) - k.volume()).abs() < 1e-9);
        let mut prev = -1.0;
        for i in 0..=20 {
            let t = lo + (hi - lo) * i as f64 / 20.0;
            let v = f.sublevel_volume(t);
            assert!(v >= prev - 1e-12, "sublevel volume not monotone");
            prev = v;
        }
    }

    #[test]
    fn snap_regular_moves_vertex_values() {
        let f = x_sweep_square();
        let v = f.values[1];
        let (t, nudged) = f.snap_regular(v);
        assert!(nudged);
        assert!(f.values.iter().all(|&w| (t - w).abs() > 0.0));
    }
}
