//! Closed-form values used as oracles for the solvers.

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::roots::characteristic_roots;
use crate::walk::{binomial_row, expected_abs_srw_with_row};

/// (E|x + S_ℓ| − |x|)/2 for a fair ±1 walk S, exactly; `x <= 0` is the
/// trailing expert's position relative to the leader.
pub fn finite_regret_closed2(x: i64, remaining: u32) -> Result<BigRational> {
    if x > 0 {
        return Err(Error::InvalidInput(format!(
            "relative position must be <= 0, got {x}"
        )));
    }
    let e = expected_abs_srw_with_row(x, remaining, &binomial_row(remaining));
    Ok((e - BigRational::from_integer(BigInt::from(x.abs()))) / BigInt::from(2))
}

/// Geometric-horizon minimax value from the closed forms for k = 2 and 3.
///
/// k=2: ξ^d/(ξ1 − ξ2). k=3: ξ^d12/(ξ1 − ξ2) + ξ^(2·d13 − d12)/(3(ξ1 − ξ2)),
/// with ξ the sub-unit root.
pub fn geometric_regret_closed(k: usize, delta: f64, gaps: &[u32]) -> Result<f64> {
    let roots = characteristic_roots(delta)?;
    if gaps.len() + 1 != k || gaps.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidInput(format!(
            "{gaps:?} is not a sorted gap vector for k={k}"
        )));
    }
    let s = roots.spread();
    match k {
        2 => Ok(roots.decay(gaps[0]) / s),
        3 => {
            let (d12, d13) = (gaps[0], gaps[1]);
            Ok(roots.decay(d12) / s + roots.decay(2 * d13 - d12) / (3.0 * s))
        }
        _ => Err(Error::Unsupported(format!(
            "closed form known for k=2 and k=3 only, got {k}"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn finite_examples() {
        for x in -5..=0 {
            assert_eq!(finite_regret_closed2(x, 0).unwrap(), q(0, 1));
        }
        assert_eq!(finite_regret_closed2(0, 3).unwrap(), q(3, 4));
        assert_eq!(finite_regret_closed2(-1, 2).unwrap(), q(1, 4));
        assert!(finite_regret_closed2(1, 2).is_err());
    }

    #[test]
    fn geometric_examples() {
        assert!((geometric_regret_closed(2, 0.5, &[0]).unwrap() - 0.2886751).abs() < 1e-7);
        assert!((geometric_regret_closed(3, 0.5, &[0, 0]).unwrap() - 0.3849002).abs() < 1e-7);
        assert!(geometric_regret_closed(2, 0.5, &[2000]).unwrap() < 1e-300);
        // k=3 origin equals the simplified form 2(1-δ)/(3√(δ(2-δ)))
        for delta in [0.5f64, 0.1, 0.01] {
            let want = 2.0 * (1.0 - delta) / (3.0 * (delta * (2.0 - delta)).sqrt());
            assert!((geometric_regret_closed(3, delta, &[0, 0]).unwrap() - want).abs() < 1e-12);
        }
        assert!(matches!(
            geometric_regret_closed(4, 0.5, &[0, 0, 0]),
            Err(Error::Unsupported(_))
        ));
        assert!(geometric_regret_closed(3, 0.5, &[2, 1]).is_err());
    }
}
