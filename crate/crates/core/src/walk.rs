//! Simple-random-walk primitives and the particle-between-walls processes.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use rand_distr::{Distribution, Geometric};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::roots::characteristic_roots;
use crate::state::check_delta;
use crate::stats::run_trials;

/// Largest walk length evaluated with exact binomial weights.
pub const EXACT_SRW_LIMIT: u32 = 10_000;

/// Row `n` of Pascal's triangle.
pub fn binomial_row(n: u32) -> Vec<BigInt> {
    let mut row = Vec::with_capacity(n as usize + 1);
    let mut c = BigInt::one();
    row.push(c.clone());
    for j in 0..n {
        c = c * BigInt::from(n - j) / BigInt::from(j + 1);
        row.push(c.clone());
    }
    row
}

/// E|x + S_ℓ| for a fair ±1 walk, exact or (beyond [`EXACT_SRW_LIMIT`]) normal-approximated.
#[derive(Debug, Clone, PartialEq)]
pub enum SrwMean {
    Exact(BigRational),
    Approximate(f64),
}

impl SrwMean {
    pub fn to_f64(&self) -> f64 {
        match self {
            SrwMean::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            SrwMean::Approximate(v) => *v,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, SrwMean::Exact(_))
    }

    pub fn exact(&self) -> Option<&BigRational> {
        match self {
            SrwMean::Exact(r) => Some(r),
            SrwMean::Approximate(_) => None,
        }
    }
}

pub fn expected_abs_srw(x: i64, steps: u32) -> SrwMean {
    if steps > EXACT_SRW_LIMIT {
        return SrwMean::Approximate(folded_normal_mean(x as f64, (steps as f64).sqrt()));
    }
    SrwMean::Exact(expected_abs_srw_with_row(x, steps, &binomial_row(steps)))
}

/// Same as [`expected_abs_srw`] but reuses a precomputed binomial row of length `steps + 1`.
pub fn expected_abs_srw_with_row(x: i64, steps: u32, row: &[BigInt]) -> BigRational {
    let n = steps as i64;
    let mut total = BigInt::zero();
    for (j, c) in row.iter().enumerate() {
        let end = x + 2 * j as i64 - n;
        if end != 0 {
            total += c * BigInt::from(end.unsigned_abs());
        }
    }
    BigRational::new(total, BigInt::one() << steps as usize)
}

/// E|Y| for Y ~ N(mu, sigma²).
fn folded_normal_mean(mu: f64, sigma: f64) -> f64 {
    if sigma == 0.0 {
        return mu.abs();
    }
    let z = mu / sigma;
    sigma * (2.0 / std::f64::consts::PI).sqrt() * (-z * z / 2.0).exp()
        + mu * (1.0 - libm::erfc(z / std::f64::consts::SQRT_2))
}

/// Probability that a fair walk started `d` above zero reaches zero before a
/// kill that strikes with probability `delta` ahead of every step.
///
/// Equals ξ^d, ξ being the sub-unit root of ξ = (1−δ)(1+ξ²)/2.
pub fn reach_prob_before_kill(d: u32, delta: f64) -> Result<f64> {
    Ok(characteristic_roots(delta)?.decay(d))
}

/// Boundary behaviour of the designated (counted) wall.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WallKind {
    /// Both walls give way when pushed (three experts).
    TwoMovable,
    /// The counted wall reflects, the other gives way (four experts).
    FixedAndMovable,
}

/// A particle doing a fair walk between two walls.
///
/// Positions are measured from the counted wall: the particle sits at
/// `particle` and the opposite wall at `width`, with `particle <= width`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WallProcessSpec {
    pub kind: WallKind,
    pub delta: f64,
    pub particle: u32,
    pub width: u32,
}

impl WallProcessSpec {
    /// Process matching the comb adversary on `k` experts, walls on the particle.
    pub fn new(k: usize, delta: f64) -> Result<Self> {
        let kind = match k {
            3 => WallKind::TwoMovable,
            4 => WallKind::FixedAndMovable,
            _ => {
                return Err(Error::Unsupported(format!(
                    "wall process is defined for k=3 or k=4, got {k}"
                )))
            }
        };
        check_delta(delta)?;
        Ok(WallProcessSpec {
            kind,
            delta,
            particle: 0,
            width: 0,
        })
    }

    pub fn with_initial(mut self, particle: u32, width: u32) -> Result<Self> {
        if particle > width {
            return Err(Error::InvalidInput(format!(
                "particle {particle} lies outside walls [0, {width}]"
            )));
        }
        self.particle = particle;
        self.width = width;
        Ok(self)
    }
}

/// Particle/wall configuration during a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WallState {
    pub particle: u32,
    pub width: u32,
}

impl WallState {
    /// One fair step; `away` moves the particle away from the counted wall.
    pub fn step(&mut self, kind: WallKind, away: bool) {
        if away {
            if self.particle == self.width {
                // far wall is always movable
                self.width += 1;
            } else {
                self.particle += 1;
            }
        } else if self.particle > 0 {
            self.particle -= 1;
        } else {
            match kind {
                // counted wall yields: particle keeps its place, so its
                // distance to both walls grows by one
                WallKind::TwoMovable => {
                    self.particle = 1;
                    self.width += 1;
                }
                WallKind::FixedAndMovable => {
                    if self.width == 0 {
                        self.width = 1;
                    } else {
                        self.particle = 1;
                    }
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WallEstimate {
    pub mean_visits: f64,
    pub visits_std_error: f64,
    /// Half the mean visit count.
    pub regret: f64,
    pub regret_std_error: f64,
    pub trials: u64,
    pub seed: u64,
}

/// Number of visits of one run: steps that start with the particle on the counted wall.
pub fn wall_visits<R: Rng + ?Sized>(spec: &WallProcessSpec, rng: &mut R) -> u64 {
    let steps = Geometric::new(spec.delta).expect("delta checked").sample(rng);
    let mut state = WallState {
        particle: spec.particle,
        width: spec.width,
    };
    let mut visits = 0;
    let mut bits = 0u64;
    for t in 0..steps {
        if t % 64 == 0 {
            bits = rng.random();
        }
        visits += (state.particle == 0) as u64;
        state.step(spec.kind, bits & 1 == 1);
        bits >>= 1;
    }
    visits
}

pub fn simulate_walls(spec: &WallProcessSpec, trials: u64, seed: u64) -> Result<WallEstimate> {
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be at least 1".into()));
    }
    check_delta(spec.delta)?;
    let m = run_trials(trials, seed, 1, |_, rng, out| {
        out[0] = wall_visits(spec, rng) as f64;
    });
    let mean = m.mean(0);
    let se = m.std_error(0);
    Ok(WallEstimate {
        mean_visits: mean,
        visits_std_error: se,
        regret: mean / 2.0,
        regret_std_error: se / 2.0,
        trials,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    /// Brute force over all 2^ℓ sign sequences.
    fn enumerate_abs(x: i64, steps: u32) -> BigRational {
        let mut total = 0i64;
        for mask in 0..1u64 << steps {
            let s: i64 = (0..steps).map(|i| if mask >> i & 1 == 1 { 1 } else { -1 }).sum();
            total += (x + s).abs();
        }
        q(total, 1 << steps)
    }

    #[test]
    fn small_walks_match_enumeration() {
        assert_eq!(expected_abs_srw(0, 3).exact().unwrap(), &q(3, 2));
        for x in -4..=4 {
            assert_eq!(expected_abs_srw(x, 0).exact().unwrap(), &q(x.abs(), 1));
            for l in 1..=10 {
                assert_eq!(expected_abs_srw(x, l).exact().unwrap(), &enumerate_abs(x, l));
            }
        }
    }

    #[test]
    fn large_walk_asymptotics() {
        let v = expected_abs_srw(0, 100).to_f64();
        let ratio = v / (200.0 / std::f64::consts::PI).sqrt();
        assert!((0.995..=1.005).contains(&ratio), "{ratio}");
    }

    #[test]
    fn approximation_beyond_limit() {
        let m = expected_abs_srw(0, EXACT_SRW_LIMIT + 2);
        assert!(!m.is_exact());
        let exact = expected_abs_srw(0, EXACT_SRW_LIMIT).to_f64();
        assert!((m.to_f64() - exact).abs() / exact < 1e-3);
        // far from the origin the walk never changes sign
        let far = expected_abs_srw(-1_000_000, 20_000).to_f64();
        assert!((far - 1_000_000.0).abs() < 1e-6);
    }

    #[test]
    fn reach_probabilities() {
        assert_eq!(reach_prob_before_kill(0, 0.3).unwrap(), 1.0);
        // fixed-point iteration of xi = (1-delta)(1+xi^2)/2 from 0
        let mut xi: f64 = 0.0;
        for _ in 0..10_000 {
            xi = (1.0 - 0.5) * (1.0 + xi * xi) / 2.0;
        }
        assert!((reach_prob_before_kill(1, 0.5).unwrap() - xi).abs() < 1e-9);
        assert!((reach_prob_before_kill(1, 0.5).unwrap() - 0.2679492).abs() < 1e-7);
        assert!((reach_prob_before_kill(2, 0.1).unwrap() - 0.3928645).abs() < 1e-7);
    }

    #[test]
    fn walls_die_fast_when_delta_large() {
        let spec = WallProcessSpec::new(3, 0.99).unwrap();
        let est = simulate_walls(&spec, 20_000, 3).unwrap();
        // E[steps] = 0.01/0.99 and every early step is a visit
        assert!(est.regret < 0.01);
    }

    #[test]
    fn wall_rules() {
        let mut s = WallState {
            particle: 0,
            width: 0,
        };
        s.step(WallKind::TwoMovable, false);
        assert_eq!(
            s,
            WallState {
                particle: 1,
                width: 1
            }
        );
        let mut s = WallState {
            particle: 0,
            width: 0,
        };
        s.step(WallKind::TwoMovable, true);
        assert_eq!(
            s,
            WallState {
                particle: 0,
                width: 1
            }
        );
        let mut s = WallState {
            particle: 0,
            width: 3,
        };
        s.step(WallKind::FixedAndMovable, false);
        assert_eq!(
            s,
            WallState {
                particle: 1,
                width: 3
            }
        );
        let mut s = WallState {
            particle: 2,
            width: 2,
        };
        s.step(WallKind::FixedAndMovable, true);
        assert_eq!(
            s,
            WallState {
                particle: 2,
                width: 3
            }
        );
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(WallProcessSpec::new(5, 0.1).is_err());
        assert!(WallProcessSpec::new(3, 1.0).is_err());
        assert!(WallProcessSpec::new(3, 0.1).unwrap().with_initial(3, 2).is_err());
        assert!(simulate_walls(&WallProcessSpec::new(3, 0.1).unwrap(), 0, 1).is_err());
    }
}
