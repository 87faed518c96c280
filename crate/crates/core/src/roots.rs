//! Roots of x² − 2x/(1−δ) + 1 = 0, the characteristic polynomial of the
//! discounted random-walk recurrences.

use serde::Serialize;

use crate::error::Result;
use crate::state::check_delta;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RootPair {
    /// Root above one.
    pub xi1: f64,
    /// Root below one; the probability that a discounted walk closes a unit gap.
    pub xi2: f64,
    pub delta: f64,
}

impl RootPair {
    /// ξ₁ − ξ₂ = 2√(δ(2−δ))/(1−δ).
    pub fn spread(&self) -> f64 {
        let e = 1.0 - self.delta;
        2.0 * (self.delta * (2.0 - self.delta)).sqrt() / e
    }

    /// ξ₂^d, computed without going through ξ₁.
    #[inline]
    pub fn decay(&self, d: u32) -> f64 {
        self.xi2.powi(d as i32)
    }
}

pub fn characteristic_roots(delta: f64) -> Result<RootPair> {
    check_delta(delta)?;
    let e = 1.0 - delta;
    let s = (delta * (2.0 - delta)).sqrt();
    // (1 - s)/e rewritten to avoid cancellation as delta -> 1
    let xi2 = e / (1.0 + s);
    let xi1 = (1.0 + s) / e;
    Ok(RootPair { xi1, xi2, delta })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn half_delta() {
        // quadratic formula: (2 ± sqrt(4 - 4·0.25))/(2·0.5) = 2 ± sqrt(3)
        let r = characteristic_roots(0.5).unwrap();
        assert!((r.xi1 - (2.0 + 3f64.sqrt())).abs() < 1e-12);
        assert!((r.xi2 - (2.0 - 3f64.sqrt())).abs() < 1e-12);
        assert!((r.xi1 * r.xi2 - 1.0).abs() < 1e-12);
        assert!((r.xi1 - 3.7320508).abs() < 1e-7);
        assert!((r.xi2 - 0.2679492).abs() < 1e-7);
        assert!((r.spread() - (r.xi1 - r.xi2)).abs() < 1e-12);
    }

    #[test]
    fn small_delta_asymptotics() {
        let r = characteristic_roots(0.005).unwrap();
        assert!((r.xi2 - 0.9).abs() < 1e-2);
        assert!(r.xi2 < 1.0 && r.xi1 > 1.0);
    }

    #[test]
    fn rejects_out_of_range() {
        for d in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(characteristic_roots(d), Err(Error::Domain(_))));
        }
    }

    #[test]
    fn matches_textbook_formula() {
        for &d in &[0.01, 0.1, 0.5, 0.9] {
            let e: f64 = 1.0 - d;
            let naive = (1.0 - (1.0 - e * e).sqrt()) / e;
            let r = characteristic_roots(d).unwrap();
            assert!((r.xi2 - naive).abs() < 1e-12, "delta {d}");
        }
    }
}
