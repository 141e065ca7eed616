//! Exact level-set slices of linear functions on realized simplices.
//!
//! The level set of a linear function inside an n-simplex is a segment
//! (n=2) or a triangle/quadrilateral (n=3). Between two consecutive vertex
//! values its (n-1)-volume is a polynomial in t of degree <= n-1; these
//! per-interval polynomials are what the width profile sums.

use crate::geom::{self, fit_poly, Point3, Poly2};

/// Slice the realized simplex `points` (with per-vertex `values`) at level
/// `t`. Returns the (n-1)-volume and the polygon vertices (2 points for a
/// segment, 3 or 4 for a planar polygon in cyclic order). Vertices with
/// value exactly t count as above.
pub fn slice_simplex(points: &[Point3], values: &[f64], t: f64) -> (f64, Vec<Point3>) {
    let k = points.len() - 1;
    let below: Vec<usize> = (0..=k).filter(|&i| values[i] < t).collect();
    let above: Vec<usize> = (0..=k).filter(|&i| values[i] >= t).collect();
    if below.is_empty() || above.is_empty() {
        return (0.0, Vec::new());
    }
    let cross = |i: usize, j: usize| -> Point3 {
        let s = (t - values[i]) / (values[j] - values[i]);
        geom::lerp(points[i], points[j], s)
    };
    match k {
        2 => {
            // segment across the two straddling edges
            let mut pts = Vec::with_capacity(2);
            for &i in &below {
                for &j in &above {
                    pts.push(cross(i, j));
                }
            }
            // generic case: exactly 2 crossings (1-2 or 2-1 split)
            debug_assert_eq!(pts.len(), 2);
            (geom::distance(pts[0], pts[1]), pts)
        }
        3 => {
            if below.len() == 1 || below.len() == 3 {
                let (apex, base) = if below.len() == 1 {
                    (below[0], &above)
                } else {
                    (above[0], &below)
                };
                let p: Vec<Point3> = base.iter().map(|&j| cross(apex, j)).collect();
                (geom::triangle_area(p[0], p[1], p[2]), p)
            } else {
                // 2-2 split: quadrilateral p_ac, p_ad, p_bd, p_bc in cyclic order
                let (a, b) = (below[0], below[1]);
                let (c, d) = (above[0], above[1]);
                let pac = cross(a, c);
                let pad = cross(a, d);
                let pbd = cross(b, d);
                let pbc = cross(b, c);
                let area = geom::triangle_area(pac, pad, pbd) + geom::triangle_area(pac, pbd, pbc);
                (area, vec![pac, pad, pbd, pbc])
            }
        }
        _ => panic!("unsupported simplex dimension {k}"),
    }
}

/// One per-interval polynomial of a simplex profile: on `[a, b]` the slice
/// volume equals `poly(t - a)`.
#[derive(Clone, Debug)]
pub struct LocalPoly {
    pub a: f64,
    pub b: f64,
    pub poly: Poly2,
}

/// Per-simplex slice-volume profile: one polynomial of degree <= n-1 per
/// interval between consecutive distinct vertex values. The polynomial is
/// recovered exactly by sampling inside the interval (the slice volume is
/// a polynomial there); sample abscissae are re-derived from the rounded
/// sample points so the fit is exact at machine precision.
pub fn simplex_profile(points: &[Point3], values: &[f64]) -> Vec<LocalPoly> {
    let deg = points.len() - 2; // n - 1
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    let mut out = Vec::new();
    for w in sorted.windows(2) {
        let (a, b) = (w[0], w[1]);
        let span = b - a;
        let fracs: &[f64] = match deg {
            1 => &[0.25, 0.75],
            2 => &[0.25, 0.5, 0.75],
            _ => unreachable!(),
        };
        let samples: Vec<(f64, f64)> = fracs
            .iter()
            .map(|&fr| {
                let t = a + fr * span;
                let u = t - a; // exactly the local coordinate of the sample
                (u, slice_simplex(points, values, t).0)
            })
            .collect();
        out.push(LocalPoly { a, b, poly: fit_poly(&samples, deg) });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn right_triangle_slice_matches_hand_computation() {
        // A=(0,0) v=0, B=(1,0) v=1, C=(0,1) v=2, t=0.5:
        // crossings (0.5, 0) and (0, 0.25), length sqrt(0.3125).
        let points = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        let values = vec![0.0, 1.0, 2.0];
        let (len, poly) = slice_simplex(&points, &values, 0.5);
        assert!((len - 0.3125f64.sqrt()).abs() < 1e-12);
        assert_eq!(poly.len(), 2);
        let mut endpoints = poly.clone();
        endpoints.sort_by(|p, q| p[0].total_cmp(&q[0]));
        assert!(crate::geom::distance(endpoints[0], [0.0, 0.25, 0.0]) < 1e-12);
        assert!(crate::geom::distance(endpoints[1], [0.5, 0.0, 0.0]) < 1e-12);
    }

    #[test]
    fn slice_outside_range_is_empty() {
        let points = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        let values = vec![0.0, 1.0, 2.0];
        let (len, poly) = slice_simplex(&points, &values, -0.5);
        assert_eq!(len, 0.0);
        assert!(poly.is_empty());
        assert_eq!(slice_simplex(&points, &values, 2.5).0, 0.0);
    }

    #[test]
    fn tet_quad_slice_at_two_two_split() {
        // unit corner tet, values 0,1,2,3; t = 1.5 gives a quadrilateral
        let points = vec![
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
        ];
        let values = vec![0.0, 1.0, 2.0, 3.0];
        let (area, poly) = slice_simplex(&points, &values, 1.5);
        assert_eq!(poly.len(), 4);
        assert!(area > 0.0);
    }

    #[test]
    fn profile_matches_direct_slices() {
        let points = vec![
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
        ];
        let values = vec![0.0, 0.4, 1.1, 3.0];
        let profile = simplex_profile(&points, &values);
        assert_eq!(profile.len(), 3);
        for lp in &profile {
            for fr in [0.1, 0.37, 0.62, 0.9] {
                let t = lp.a + fr * (lp.b - lp.a);
                let direct = slice_simplex(&points, &values, t).0;
                let fitted = lp.poly.eval(t - lp.a);
                assert!(
                    (direct - fitted).abs() <= 1e-9 * direct.max(1e-12),
                    "t={t} direct={direct} fitted={fitted}"
                );
            }
        }
    }

    #[test]
    fn profile_handles_tiny_intervals() {
        // near-tied values: the fit must stay accurate on a 1e-10 interval
        let points = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        let values = vec![0.0, 1.0, 1.0 + 1e-10];
        let profile = simplex_profile(&points, &values);
        let lp = profile.last().unwrap();
        assert!(lp.b - lp.a < 2e-10);
        let t = lp.a + 0.4 * (lp.b - lp.a);
        let direct = slice_simplex(&points, &values, t).0;
        let fitted = lp.poly.eval(t - lp.a);
        assert!((direct - fitted).abs() <= 1e-9 * direct.max(1e-9));
    }
}
