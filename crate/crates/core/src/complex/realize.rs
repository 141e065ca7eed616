//! Per-simplex flat realizations from edge lengths.
//!
//! A simplex with squared edge lengths d_ij^2 embeds isometrically in
//! Euclidean space iff the Gram matrix G_ij = (d_0i^2 + d_0j^2 - d_ij^2)/2
//! is positive definite; the rows of its Cholesky factor are the vertex
//! coordinates relative to vertex 0. This is equivalent to strict
//! Cayley-Menger positivity and also yields the simplex volume.

use crate::geom::{distance, Point3};
use crate::REALIZE_REL_TOL;

/// Embed a simplex with `k + 1` vertices from its pairwise lengths.
/// `lengths[i][j]` must hold the length between local vertices i and j.
/// Returns the realized points (vertex 0 at the origin) or `None` when the
/// lengths admit no nondegenerate flat realization, tested as: every
/// Cholesky pivot positive and the realization reproducing every input
/// length to `REALIZE_REL_TOL` relative.
pub fn realize_simplex(lengths: &[[f64; 4]; 4], k: usize) -> Option<Vec<Point3>> {
    debug_assert!(k <= 3);
    // Gram matrix of the difference vectors v_i - v_0.
    let mut gram = [[0.0f64; 3]; 3];
    for i in 0..k {
        for j in 0..k {
            let d0i = lengths[0][i + 1];
            let d0j = lengths[0][j + 1];
            let dij = lengths[i + 1][j + 1];
            gram[i][j] = 0.5 * (d0i * d0i + d0j * d0j - dij * dij);
        }
    }
    // Cholesky: rows of L are the coordinates of v_i - v_0.
    let mut l = [[0.0f64; 3]; 3];
    for i in 0..k {
        for j in 0..=i {
            let mut s = gram[i][j];
            for m in 0..j {
                s -= l[i][m] * l[j][m];
            }
            if i == j {
                if s <= 0.0 {
                    return None;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    let mut points = vec![[0.0f64; 3]; k + 1];
    for i in 0..k {
        points[i + 1] = [l[i][0], l[i][1], l[i][2]];
    }
    // Reject realizations that fail to reproduce the input lengths; this is
    // the working definition of degeneracy (covers near-zero pivots).
    for i in 0..=k {
        for j in (i + 1)..=k {
            let got = distance(points[i], points[j]);
            let want = lengths[i][j];
            if (got - want).abs() > REALIZE_REL_TOL * want {
                return None;
            }
        }
    }
    Some(points)
}

/// Volume of a realized simplex: length, area or tetrahedral volume
/// depending on the number of points.
pub fn simplex_volume(points: &[Point3]) -> f64 {
    match points.len() {
        1 => 0.0,
        2 => distance(points[0], points[1]),
        3 => crate::geom::triangle_area(points[0], points[1], points[2]),
        4 => crate::geom::tet_volume(points[0], points[1], points[2], points[3]),
        n => panic!("unsupported simplex with {n} points"),
    }
}

/// Volume of a (k)-simplex directly from its pairwise lengths, or `None`
/// if degenerate.
pub fn volume_from_lengths(lengths: &[[f64; 4]; 4], k: usize) -> Option<f64> {
    realize_simplex(lengths, k).map(|p| simplex_volume(&p))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn length_matrix(pairs: &[(usize, usize, f64)], k: usize) -> [[f64; 4]; 4] {
        let mut m = [[0.0; 4]; 4];
        for &(i, j, l) in pairs {
            m[i][j] = l;
            m[j][i] = l;
        }
        for i in 0..=k {
            m[i][i] = 0.0;
        }
        m
    }

    #[test]
    fn right_triangle_realizes() {
        let m = length_matrix(&[(0, 1, 3.0), (0, 2, 4.0), (1, 2, 5.0)], 2);
        let p = realize_simplex(&m, 2).expect("valid triangle");
        assert!((simplex_volume(&p) - 6.0).abs() < 1e-9);
    }

    #[test]
    fn triangle_inequality_violation_rejected() {
        let m = length_matrix(&[(0, 1, 1.0), (0, 2, 1.0), (1, 2, 3.0)], 2);
        assert!(realize_simplex(&m, 2).is_none());
    }

    #[test]
    fn flat_triangle_rejected() {
        let m = length_matrix(&[(0, 1, 1.0), (0, 2, 2.0), (1, 2, 1.0)], 2);
        assert!(realize_simplex(&m, 2).is_none());
    }

    #[test]
    fn regular_tet_volume() {
        let mut pairs = Vec::new();
        for i in 0..4 {
            for j in (i + 1)..4 {
                pairs.push((i, j, 1.0));
            }
        }
        let m = length_matrix(&pairs, 3);
        let v = volume_from_lengths(&m, 3).expect("regular tet");
        // vol = 1/(6 sqrt 2) for unit edges
        assert!((v - 1.0 / (6.0 * 2.0f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn corner_tet_roundtrip() {
        let s2 = 2.0f64.sqrt();
        let m = length_matrix(
            &[
                (0, 1, 1.0),
                (0, 2, 1.0),
                (0, 3, 1.0),
                (1, 2, s2),
                (1, 3, s2),
                (2, 3, s2),
            ],
            3,
        );
        let p = realize_simplex(&m, 3).expect("corner tet");
        assert!((simplex_volume(&p) - 1.0 / 6.0).abs() < 1e-12);
        for i in 0..4 {
            for j in (i + 1)..4 {
                let got = distance(p[i], p[j]);
                assert!((got - m[i][j]).abs() <= 1e-9 * m[i][j]);
            }
        }
    }
}
