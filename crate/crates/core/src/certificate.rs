//! Machine-checkable certificates: each ties a constructed object to the
//! inequality it must satisfy, with achieved and required values and the
//! tolerance the comparison used.

use crate::CERT_REL_TOL;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Certificate {
    /// Which inequality this certifies.
    pub name: String,
    /// Achieved value of the constrained quantity.
    pub achieved: f64,
    /// The bound it must satisfy.
    pub required: f64,
    /// "le" (achieved <= required) or "ge".
    pub relation: String,
    /// Relative tolerance used in the comparison.
    pub tolerance: f64,
    pub passed: bool,
}

impl Certificate {
    /// achieved <= required * (1 + tol)
    pub fn upper(name: impl Into<String>, achieved: f64, required: f64) -> Self {
        let passed = achieved <= required * (1.0 + CERT_REL_TOL) + f64::MIN_POSITIVE;
        Certificate {
            name: name.into(),
            achieved,
            required,
            relation: "le".into(),
            tolerance: CERT_REL_TOL,
            passed,
        }
    }

    /// achieved >= required * (1 - tol)
    pub fn lower(name: impl Into<String>, achieved: f64, required: f64) -> Self {
        let passed = achieved >= required * (1.0 - CERT_REL_TOL) - f64::MIN_POSITIVE;
        Certificate {
            name: name.into(),
            achieved,
            required,
            relation: "ge".into(),
            tolerance: CERT_REL_TOL,
            passed,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn upper_and_lower_pass_within_tolerance() {
        assert!(Certificate::upper("x", 1.0, 1.0).passed);
        assert!(Certificate::upper("x", 1.0 + 0.5e-6, 1.0).passed);
        assert!(!Certificate::upper("x", 1.01, 1.0).passed);
        assert!(Certificate::lower("x", 1.0 - 0.5e-6, 1.0).passed);
        assert!(!Certificate::lower("x", 0.99, 1.0).passed);
    }
}
