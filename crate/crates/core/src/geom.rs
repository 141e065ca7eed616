//! Small fixed-dimension vector helpers, compensated summation and the
//! degree-two polynomial arithmetic used by the width profiles.

pub type Point3 = [f64; 3];

pub fn sub(a: Point3, b: Point3) -> Point3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn add(a: Point3, b: Point3) -> Point3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn scale(a: Point3, s: f64) -> Point3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn dot(a: Point3, b: Point3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: Point3, b: Point3) -> Point3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn norm(a: Point3) -> f64 {
    dot(a, a).sqrt()
}

pub fn distance(a: Point3, b: Point3) -> f64 {
    norm(sub(a, b))
}

/// Point at parameter `s` along the segment from `a` to `b`.
pub fn lerp(a: Point3, b: Point3, s: f64) -> Point3 {
    [
        a[0] + s * (b[0] - a[0]),
        a[1] + s * (b[1] - a[1]),
        a[2] + s * (b[2] - a[2]),
    ]
}

/// Area of the triangle `a b c`.
pub fn triangle_area(a: Point3, b: Point3, c: Point3) -> f64 {
    0.5 * norm(cross(sub(b, a), sub(c, a)))
}

/// Unsigned volume of the tetrahedron `a b c d`.
pub fn tet_volume(a: Point3, b: Point3, c: Point3, d: Point3) -> f64 {
    (dot(sub(b, a), cross(sub(c, a), sub(d, a))) / 6.0).abs()
}

/// Kahan compensated accumulator. Sums are accumulated in index order so
/// results are independent of evaluation order by construction.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: f64) {
        let y = value - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

pub fn kahan_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = KahanSum::new();
    for v in values {
        acc.add(v);
    }
    acc.value()
}

/// Polynomial of degree <= 2 in a local variable `u`, used for per-interval
/// level-set volume profiles. Coefficients are kept in a basis centered at
/// the start of the interval the polynomial lives on; see `shift`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Poly2 {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
}

impl Poly2 {
    pub fn eval(&self, u: f64) -> f64 {
        self.c0 + u * (self.c1 + u * self.c2)
    }

    /// Re-center the polynomial at `u = delta`, i.e. return q with
    /// q(u) = p(u + delta).
    pub fn shift(&self, delta: f64) -> Poly2 {
        Poly2 {
            c0: self.eval(delta),
            c1: self.c1 + 2.0 * self.c2 * delta,
            c2: self.c2,
        }
    }

    pub fn add_assign(&mut self, other: &Poly2) {
        self.c0 += other.c0;
        self.c1 += other.c1;
        self.c2 += other.c2;
    }

    pub fn sub_assign(&mut self, other: &Poly2) {
        self.c0 -= other.c0;
        self.c1 -= other.c1;
        self.c2 -= other.c2;
    }

    /// Maximum of the polynomial over `[0, width]`, returning `(u*, value)`.
    /// Endpoints are included; interior critical point checked for the
    /// quadratic case. Ties resolve to the smaller `u`.
    pub fn max_on(&self, width: f64) -> (f64, f64) {
        let mut best_u = 0.0;
        let mut best = self.eval(0.0);
        let end = self.eval(width);
        if end > best {
            best = end;
            best_u = width;
        }
        if self.c2 != 0.0 {
            let u = -self.c1 / (2.0 * self.c2);
            if u > 0.0 && u < width {
                let v = self.eval(u);
                if v > best {
                    best = v;
                    best_u = u;
                }
            }
        }
        (best_u, best)
    }
}

/// Fit a polynomial of degree `deg` (1 or 2) through the sampled points
/// `(s_i, v_i)` given in the local variable of the interval. The sample
/// positions need not be equally spaced.
pub fn fit_poly(samples: &[(f64, f64)], deg: usize) -> Poly2 {
    match deg {
        0 => Poly2 { c0: samples[0].1, c1: 0.0, c2: 0.0 },
        1 => {
            let (s0, v0) = samples[0];
            let (s1, v1) = samples[1];
            let c1 = (v1 - v0) / (s1 - s0);
            Poly2 { c0: v0 - c1 * s0, c1, c2: 0.0 }
        }
        2 => {
            let (s0, v0) = samples[0];
            let (s1, v1) = samples[1];
            let (s2, v2) = samples[2];
            // Newton's divided differences, expanded to monomial form.
            let d01 = (v1 - v0) / (s1 - s0);
            let d12 = (v2 - v1) / (s2 - s1);
            let c2 = (d12 - d01) / (s2 - s0);
            let c1 = d01 - c2 * (s0 + s1);
            let c0 = v0 - s0 * (c1 + s0 * c2);
            Poly2 { c0, c1, c2 }
        }
        _ => panic!("degree {deg} not supported"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_area_right() {
        let a = [0.0, 0.0, 0.0];
        let b = [3.0, 0.0, 0.0];
        let c = [0.0, 4.0, 0.0];
        assert!((triangle_area(a, b, c) - 6.0).abs() < 1e-12);
    }

    #[test]
    fn tet_volume_unit_corner() {
        let v = tet_volume(
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
        );
        assert!((v - 1.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn kahan_beats_naive_on_small_increments() {
        let mut acc = KahanSum::new();
        for _ in 0..1_000_000 {
            acc.add(1e-10);
        }
        assert!((acc.value() - 1e-4).abs() < 1e-18);
    }

    #[test]
    fn poly_fit_roundtrip_quadratic() {
        let p = Poly2 { c0: 1.5, c1: -2.0, c2: 0.75 };
        let samples: Vec<(f64, f64)> = [0.25, 0.5, 0.75].iter().map(|&s| (s, p.eval(s))).collect();
        let q = fit_poly(&samples, 2);
        for s in [0.0, 0.1, 0.9, 1.3] {
            assert!((p.eval(s) - q.eval(s)).abs() < 1e-12);
        }
    }

    #[test]
    fn poly_shift_consistent() {
        let p = Poly2 { c0: 0.3, c1: 1.1, c2: -0.4 };
        let q = p.shift(0.7);
        for u in [0.0, 0.2, 0.5] {
            assert!((q.eval(u) - p.eval(u + 0.7)).abs() < 1e-12);
        }
    }

    #[test]
    fn poly_max_interior_vertex() {
        // p(u) = -(u-1)^2 + 2 on [0, 3]: max 2 at u = 1.
        let p = Poly2 { c0: 1.0, c1: 2.0, c2: -1.0 };
        let (u, v) = p.max_on(3.0);
        assert!((u - 1.0).abs() < 1e-12);
        assert!((v - 2.0).abs() < 1e-12);
    }
}
