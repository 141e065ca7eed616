//! The audited table of dimensional constants used by every certificate.
//!
//! All entries are computed from closed forms in double precision; each
//! also carries an exact symbolic string for reports. Unit-ball volumes
//! come from the recurrence omega_k = omega_{k-2} * 2 pi / k with
//! omega_0 = 1 and omega_1 = 2 (the length of the unit 1-ball; the table
//! flags this convention). The recurrence is exact, so no Gamma-function
//! evaluation is needed, but `gamma` below implements the Lanczos form
//! used to cross-check the table.

use crate::{Error, Result};
use serde::Serialize;
use std::f64::consts::PI;

/// One table entry: numeric value plus its defining formula as text.
#[derive(Clone, Debug, Serialize)]
pub struct Entry {
    pub value: f64,
    pub symbolic: String,
}

fn entry(value: f64, symbolic: impl Into<String>) -> Entry {
    Entry { value, symbolic: symbolic.into() }
}

/// Every explicit dimensional constant of the construction, for one n.
#[derive(Clone, Debug, Serialize)]
pub struct ConstantTable {
    pub n: usize,
    /// omega[k] = volume of the unit k-ball, for k <= n. omega_1 = 2 by
    /// convention (flagged: the length of the unit interval ball).
    pub omega: Vec<Entry>,
    /// Packing constant: a 2r-ball is covered by c_n = 9^n r-balls.
    pub c_n: Entry,
    /// Capacitor volume fraction lambda_n = 1/(1 + 2 c_n).
    pub lambda_n: Entry,
    /// Splitting area constant A_n = (omega_n (1 + 2 c_n))^(1/n).
    pub a_n: Entry,
    /// Splitting balance constant alpha_n = 1/(1 + 2 c_n).
    pub alpha_n: Entry,
    /// Capacitor radius coefficient (omega_n (1 + 2 c_n))^(-1/n), so that
    /// r = coeff * vol^(1/n) satisfies omega_n r^n = lambda_n vol.
    pub r_coeff: Entry,
    /// Per-cell chain replacement factor
    /// C_{n-1} = max(36^(n-1), n omega_n 6^(n-1) / (2 omega_{n-1})).
    pub c_n_minus_1: Entry,
    /// Euclidean isoperimetric constant I_n = (1/(n^n omega_n))^(1/(n-1)).
    pub i_n: Entry,
    /// Volume-transfer constant
    /// K_n = max(I_n (1 + C_{n-1})^(n/(n-1)), omega_n 6^n).
    pub k_n: Entry,
    /// Skeletonized chain constant
    /// A'_n = max(C_{n-1} A_n, n omega_n^(1/n) 3^(n-1)).
    pub a_prime_n: Entry,
    /// Cell-count threshold N_0 = (K_n A'_n / alpha_n)^n / omega_n.
    pub n_0: Entry,
    /// Skeletonized balance constant
    /// alpha'_n = min(alpha_n / 2, omega_n (alpha_n / (6 K_n A'_n))^n).
    pub alpha_prime_n: Entry,
    /// Single-cell sweep coefficient 6^(n-1) omega_{n-1} omega_n^(-(n-1)/n).
    pub single_cell: Entry,
    /// The final width constant
    /// C_n = max(2n A'_n / (1 - (1 - alpha'_n)^((n-1)/n)), single_cell).
    pub c_width: Entry,
}

/// Unit k-ball volumes omega_0..omega_n via the exact recurrence.
pub fn unit_ball_volumes(n: usize) -> Vec<f64> {
    let mut omega = vec![0.0; n + 1];
    omega[0] = 1.0;
    if n >= 1 {
        omega[1] = 2.0;
    }
    for k in 2..=n {
        omega[k] = omega[k - 2] * 2.0 * PI / k as f64;
    }
    omega
}

fn omega_symbolic(k: usize) -> String {
    // omega_{2m} = pi^m / m!, omega_{2m+1} = 2 (4 pi)^m m! / (2m+1)!
    match k {
        0 => "1".into(),
        1 => "2".into(),
        2 => "pi".into(),
        3 => "4*pi/3".into(),
        _ => format!("pi^({k}/2)/Gamma({k}/2+1)"),
    }
}

/// Build the table for dimension n (2 <= n <= 16). Entries beyond n = 8
/// may overflow to infinity where the closed forms do; for n <= 8 all
/// entries are finite and positive.
pub fn build_table(n: usize) -> Result<ConstantTable> {
    if !(2..=16).contains(&n) {
        return Err(Error::UnsupportedDimension { dim: n, min: 2, max: 16 });
    }
    let nf = n as f64;
    let omega = unit_ball_volumes(n);
    let om_n = omega[n];
    let om_n1 = omega[n - 1];
    let c_n = 9.0f64.powi(n as i32);
    let lambda = 1.0 / (1.0 + 2.0 * c_n);
    let a_n = (om_n * (1.0 + 2.0 * c_n)).powf(1.0 / nf);
    let r_coeff = 1.0 / a_n;
    let proj = 36.0f64.powi(n as i32 - 1);
    let boundary_min = nf * om_n * 6.0f64.powi(n as i32 - 1) / (2.0 * om_n1);
    let c_nm1 = proj.max(boundary_min);
    let i_n = (1.0 / (nf.powi(n as i32) * om_n)).powf(1.0 / (nf - 1.0));
    let k_n = (i_n * (1.0 + c_nm1).powf(nf / (nf - 1.0))).max(om_n * 6.0f64.powi(n as i32));
    let a_prime = (c_nm1 * a_n).max(nf * om_n.powf(1.0 / nf) * 3.0f64.powi(n as i32 - 1));
    let n_0 = (k_n * a_prime / lambda).powi(n as i32) / om_n;
    let alpha_prime = (lambda / 2.0).min(om_n * (lambda / (6.0 * k_n * a_prime)).powi(n as i32));
    let single_cell = 6.0f64.powi(n as i32 - 1) * om_n1 * om_n.powf(-(nf - 1.0) / nf);
    // 1 - (1 - a)^((n-1)/n) evaluated stably for tiny a
    let contraction = -(((nf - 1.0) / nf) * (-alpha_prime).ln_1p()).exp_m1();
    let c_width = (2.0 * nf * a_prime / contraction).max(single_cell);
    Ok(ConstantTable {
        n,
        omega: omega
            .iter()
            .enumerate()
            .map(|(k, &v)| entry(v, omega_symbolic(k)))
            .collect(),
        c_n: entry(c_n, format!("9^{n}")),
        lambda_n: entry(lambda, format!("1/(1+2*9^{n})")),
        a_n: entry(a_n, format!("(omega_{n}*(1+2*9^{n}))^(1/{n})")),
        alpha_n: entry(lambda, format!("1/(1+2*9^{n})")),
        r_coeff: entry(r_coeff, format!("(omega_{n}*(1+2*9^{n}))^(-1/{n})")),
        c_n_minus_1: entry(
            c_nm1,
            format!("max(36^{}, {n}*omega_{n}*6^{}/(2*omega_{}))", n - 1, n - 1, n - 1),
        ),
        i_n: entry(i_n, format!("(1/({n}^{n}*omega_{n}))^(1/{})", n - 1)),
        k_n: entry(
            k_n,
            format!("max(I_{n}*(1+C_{})^({n}/{}), omega_{n}*6^{n})", n - 1, n - 1),
        ),
        a_prime_n: entry(
            a_prime,
            format!("max(C_{}*A_{n}, {n}*omega_{n}^(1/{n})*3^{})", n - 1, n - 1),
        ),
        n_0: entry(n_0, format!("(K_{n}*A'_{n}/alpha_{n})^{n}/omega_{n}")),
        alpha_prime_n: entry(
            alpha_prime,
            format!("min(alpha_{n}/2, omega_{n}*(alpha_{n}/(6*K_{n}*A'_{n}))^{n})"),
        ),
        single_cell: entry(
            single_cell,
            format!("6^{}*omega_{}*omega_{n}^(-{}/{n})", n - 1, n - 1, n - 1),
        ),
        c_width: entry(
            c_width,
            format!(
                "max(2*{n}*A'_{n}/(1-(1-alpha'_{n})^({}/{n})), 6^{}*omega_{}*omega_{n}^(-{}/{n}))",
                n - 1,
                n - 1,
                n - 1,
                n - 1
            ),
        ),
    })
}

impl ConstantTable {
    /// Plain-text rendering, one constant per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("n = {}\n", self.n));
        for (k, e) in self.omega.iter().enumerate() {
            out.push_str(&format!("omega_{k} = {:.17e}  [{}]\n", e.value, e.symbolic));
        }
        let rows: [(&str, &Entry); 12] = [
            ("c_n", &self.c_n),
            ("lambda_n", &self.lambda_n),
            ("A_n", &self.a_n),
            ("alpha_n", &self.alpha_n),
            ("r_coeff", &self.r_coeff),
            ("C_{n-1}", &self.c_n_minus_1),
            ("I_n", &self.i_n),
            ("K_n", &self.k_n),
            ("A'_n", &self.a_prime_n),
            ("N_0", &self.n_0),
            ("alpha'_n", &self.alpha_prime_n),
            ("C_n", &self.c_width),
        ];
        for (name, e) in rows {
            out.push_str(&format!("{name} = {:.17e}  [{}]\n", e.value, e.symbolic));
        }
        out.push_str(&format!(
            "single_cell = {:.17e}  [{}]\n",
            self.single_cell.value, self.single_cell.symbolic
        ));
        out
    }
}

/// Lipschitz bound of the radial retraction of a quasi-convex cell onto
/// its boundary: 36 lambda^2.
pub fn projection_lipschitz_bound(lambda: f64) -> f64 {
    assert!(lambda >= 1.0);
    36.0 * lambda * lambda
}

/// The length-ratio function t -> 6 cos t / sin(theta + t) with
/// sin theta = 1/6, whose supremum over (0, pi/2 - theta) is 36, attained
/// as t -> 0+. Exposed for the verification suite.
pub fn projection_ratio(t: f64) -> f64 {
    let theta = (1.0f64 / 6.0).asin();
    6.0 * t.cos() / (theta + t).sin()
}

/// Supremum estimate of `projection_ratio` over (0, pi/2 - theta): a
/// linear grid plus logarithmically spaced samples toward 0.
pub fn projection_ratio_sup(grid: usize) -> f64 {
    let theta = (1.0f64 / 6.0).asin();
    let hi = std::f64::consts::FRAC_PI_2 - theta;
    let mut sup = f64::NEG_INFINITY;
    for j in 1..=grid {
        let t = hi * j as f64 / (grid as f64 + 1.0);
        sup = sup.max(projection_ratio(t));
    }
    let mut t = hi / grid as f64;
    while t > 1e-12 {
        sup = sup.max(projection_ratio(t));
        t *= 0.5;
    }
    sup
}

/// Lanczos approximation of the Gamma function (g = 7, 9 coefficients);
/// used only to cross-check the exact omega recurrence.
pub fn gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    if x < 0.5 {
        PI / ((PI * x).sin() * gamma(1.0 - x))
    } else {
        let x = x - 1.0;
        let mut a = COEF[0];
        let t = x + G + 0.5;
        for (i, &c) in COEF.iter().enumerate().skip(1) {
            a += c / (x + i as f64);
        }
        (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn omega_values() {
        let om = unit_ball_volumes(8);
        assert_eq!(om[1], 2.0);
        assert!((om[2] - PI).abs() < 1e-15);
        assert!((om[3] - 4.0 * PI / 3.0).abs() < 1e-15);
        assert!((om[4] - PI * PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn omega_matches_gamma_formula() {
        let om = unit_ball_volumes(8);
        for (k, &v) in om.iter().enumerate() {
            let via_gamma = PI.powf(k as f64 / 2.0) / gamma(k as f64 / 2.0 + 1.0);
            assert!(
                (v - via_gamma).abs() <= 1e-10 * v.max(1.0),
                "omega_{k}: {v} vs {via_gamma}"
            );
        }
    }

    #[test]
    fn n2_spot_checks() {
        let t = build_table(2).unwrap();
        assert_eq!(t.c_n.value, 81.0);
        // alpha_2 = 1/163
        assert!((t.alpha_n.value - 1.0 / 163.0).abs() < 1e-18);
        // A_2 = sqrt(163 pi), checked through its defining square
        let a2 = t.a_n.value;
        assert!((a2 * a2 - 163.0 * PI).abs() <= 1e-12 * 163.0 * PI);
        // C_1 = max(36, 3 pi) = 36
        assert_eq!(t.c_n_minus_1.value, 36.0);
        // single-cell coefficient = 12 / sqrt(pi)
        let sc = t.single_cell.value;
        assert!((sc * PI.sqrt() - 12.0).abs() <= 1e-12 * 12.0);
    }

    #[test]
    fn capacitor_radius_consistency() {
        // omega_n r^n = lambda_n vol with r = r_coeff vol^(1/n)
        for n in 2..=8 {
            let t = build_table(n).unwrap();
            let vol: f64 = 2.7;
            let r = t.r_coeff.value * vol.powf(1.0 / n as f64);
            let lhs = t.omega[n].value * r.powi(n as i32);
            let rhs = t.lambda_n.value * vol;
            assert!((lhs - rhs).abs() <= 1e-12 * rhs, "n={n}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn all_entries_finite_positive_through_n8() {
        for n in 2..=8 {
            let t = build_table(n).unwrap();
            let vals = [
                t.c_n.value,
                t.lambda_n.value,
                t.a_n.value,
                t.alpha_n.value,
                t.r_coeff.value,
                t.c_n_minus_1.value,
                t.i_n.value,
                t.k_n.value,
                t.a_prime_n.value,
                t.n_0.value,
                t.alpha_prime_n.value,
                t.single_cell.value,
                t.c_width.value,
            ];
            for v in vals {
                assert!(v.is_finite() && v > 0.0, "n={n} entry {v}");
            }
            for e in &t.omega {
                assert!(e.value.is_finite() && e.value > 0.0);
            }
        }
    }

    #[test]
    fn max_definitions_hold() {
        for n in 2..=8 {
            let t = build_table(n).unwrap();
            let nf = n as f64;
            assert!(t.a_prime_n.value >= t.c_n_minus_1.value * t.a_n.value - 1e-12);
            assert!(
                t.a_prime_n.value
                    >= nf * t.omega[n].value.powf(1.0 / nf) * 3.0f64.powi(n as i32 - 1) - 1e-12
            );
            assert!(t.c_width.value >= t.single_cell.value - 1e-12);
            let contraction = -(((nf - 1.0) / nf) * (-t.alpha_prime_n.value).ln_1p()).exp_m1();
            assert!(t.c_width.value >= 2.0 * nf * t.a_prime_n.value / contraction - 1e-6);
        }
    }

    #[test]
    fn dimension_range_enforced() {
        assert!(matches!(build_table(1), Err(Error::UnsupportedDimension { .. })));
        assert!(matches!(build_table(17), Err(Error::UnsupportedDimension { .. })));
        assert!(build_table(16).is_ok());
    }

    #[test]
    fn projection_bound_values() {
        assert_eq!(projection_lipschitz_bound(1.0), 36.0);
        assert_eq!(projection_lipschitz_bound(2.0), 144.0);
        assert!(projection_ratio(0.1) < 36.0);
    }

    #[test]
    fn projection_ratio_sup_is_36() {
        let sup = projection_ratio_sup(10_000);
        assert!((sup - 36.0).abs() <= 1e-6, "sup = {sup}");
        // the ratio never exceeds 36 on the open interval
        let theta = (1.0f64 / 6.0).asin();
        let hi = std::f64::consts::FRAC_PI_2 - theta;
        for j in 1..=10_000 {
            let t = hi * j as f64 / 10_001.0;
            assert!(projection_ratio(t) <= 36.0 + 1e-12);
        }
    }

    #[test]
    fn tables_reproducible_bit_identically() {
        for n in 2..=8 {
            let a = build_table(n).unwrap();
            let b = build_table(n).unwrap();
            assert_eq!(a.c_width.value.to_bits(), b.c_width.value.to_bits());
            assert_eq!(a.n_0.value.to_bits(), b.n_0.value.to_bits());
            assert_eq!(a.to_text(), b.to_text());
        }
    }
}
