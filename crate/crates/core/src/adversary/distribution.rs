use std::fmt;

use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::{GainVector, RankSet, RankedState};

/// Probability distribution over subsets of ranks to advance in one round.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionDistribution {
    k: usize,
    support: Vec<(RankSet, Rational64)>,
    cumulative: Vec<f64>,
}

impl ActionDistribution {
    /// Probabilities must be positive and sum to exactly one; subsets must be distinct.
    pub fn new(k: usize, support: Vec<(RankSet, Rational64)>) -> Result<Self> {
        if k == 0 || k > 31 {
            return Err(Error::InvalidInput(format!("unsupported expert count {k}")));
        }
        if support.is_empty() {
            return Err(Error::InvalidInput("empty support".into()));
        }
        let mut total = Rational64::zero();
        for (i, &(set, p)) in support.iter().enumerate() {
            if !set.fits(k) {
                return Err(Error::InvalidInput(format!("{set} has ranks beyond k={k}")));
            }
            if p <= Rational64::zero() {
                return Err(Error::InvalidInput(format!(
                    "non-positive probability {p} on {set}"
                )));
            }
            if support[..i].iter().any(|&(s, _)| s == set) {
                return Err(Error::InvalidInput(format!("duplicate subset {set}")));
            }
            total += p;
        }
        if total != Rational64::from_integer(1) {
            return Err(Error::InvalidInput(format!("probabilities sum to {total}")));
        }
        let mut acc = 0.0;
        let cumulative = support
            .iter()
            .map(|(_, p)| {
                acc += p.to_f64().unwrap_or(0.0);
                acc
            })
            .collect();
        Ok(ActionDistribution {
            k,
            support,
            cumulative,
        })
    }

    /// Point mass on one subset.
    pub fn point(k: usize, set: RankSet) -> Result<Self> {
        Self::new(k, vec![(set, Rational64::from_integer(1))])
    }

    /// Uniform over the given subsets.
    pub fn uniform(k: usize, sets: &[RankSet]) -> Result<Self> {
        let p = Rational64::new(1, sets.len() as i64);
        Self::new(k, sets.iter().map(|&s| (s, p)).collect())
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn support(&self) -> &[(RankSet, Rational64)] {
        &self.support
    }

    /// Expected gain of each rank.
    pub fn expected_gains(&self) -> Vec<Rational64> {
        (0..self.k)
            .map(|r| {
                self.support
                    .iter()
                    .filter(|(s, _)| s.contains(r))
                    .map(|&(_, p)| p)
                    .sum()
            })
            .collect()
    }

    /// Expected value of `f(subset)`.
    pub fn expectation(&self, mut f: impl FnMut(RankSet) -> f64) -> f64 {
        self.support
            .iter()
            .map(|&(s, p)| p.to_f64().unwrap_or(0.0) * f(s))
            .sum()
    }

    pub fn sample_subset<R: Rng + ?Sized>(&self, rng: &mut R) -> RankSet {
        if self.support.len() == 1 {
            return self.support[0].0;
        }
        let u: f64 = rng.random();
        let idx = self
            .cumulative
            .iter()
            .position(|&c| u < c)
            .unwrap_or(self.support.len() - 1);
        self.support[idx].0
    }

    /// Canonical order: by subset bits.
    pub fn canonical(mut self) -> Self {
        self.support.sort_by_key(|&(s, _)| s);
        Self::new(self.k, self.support).expect("reordering keeps validity")
    }
}

impl fmt::Display for ActionDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.support.iter().map(|(s, p)| format!("{s}:{p}")).collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// Checks that every rank has the same expected gain.
pub fn is_balanced(dist: &ActionDistribution) -> (bool, Vec<Rational64>) {
    let gains = dist.expected_gains();
    let balanced = gains.windows(2).all(|w| w[0] == w[1]);
    (balanced, gains)
}

/// An [`ActionDistribution`] under which all ranks gain equally in expectation.
#[derive(Debug, Clone, PartialEq)]
pub struct BalancedDistribution(ActionDistribution);

impl BalancedDistribution {
    pub fn try_new(dist: ActionDistribution) -> Result<Self> {
        let (ok, gains) = is_balanced(&dist);
        if !ok {
            return Err(Error::InvalidInput(format!(
                "distribution {dist} is not balanced: expected gains {gains:?}"
            )));
        }
        Ok(BalancedDistribution(dist))
    }

    /// Builds from `(1-based ranks, probability)` pairs; panics on invalid input.
    /// Meant for literal tables.
    pub fn from_literal(k: usize, parts: &[(&[usize], Rational64)]) -> Self {
        let support = parts.iter().map(|&(r, p)| (RankSet::from_ranks(r), p)).collect();
        Self::try_new(ActionDistribution::new(k, support).expect("valid literal")).expect("balanced literal")
    }

    pub fn inner(&self) -> &ActionDistribution {
        &self.0
    }

    pub fn k(&self) -> usize {
        self.0.k
    }

    pub fn support(&self) -> &[(RankSet, Rational64)] {
        &self.0.support
    }

    /// Subsets in the support, without probabilities.
    pub fn subsets(&self) -> Vec<RankSet> {
        self.0.support.iter().map(|&(s, _)| s).collect()
    }

    /// Common expected gain of every rank.
    pub fn rate(&self) -> Rational64 {
        self.0.expected_gains()[0]
    }

    /// Same support and probabilities, irrespective of order.
    pub fn same_as(&self, other: &BalancedDistribution) -> bool {
        self.canonical_support() == other.canonical_support()
    }

    pub fn canonical_support(&self) -> Vec<(RankSet, Rational64)> {
        let mut s = self.0.support.clone();
        s.sort_by_key(|&(set, _)| set);
        s
    }

    /// Name in `{1}{23}` notation, subsets ordered by size then content.
    pub fn label(&self) -> String {
        let mut sets = self.subsets();
        sets.sort_by_key(|s| (s.len(), s.labels()));
        sets.iter().map(|s| s.to_string()).collect()
    }

    pub fn sample_subset<R: Rng + ?Sized>(&self, rng: &mut R) -> RankSet {
        self.0.sample_subset(rng)
    }

    pub fn to_record(&self) -> VertexRecord {
        let support = self.canonical_support();
        VertexRecord {
            support: support.iter().map(|(s, _)| s.labels()).collect(),
            prob: support.iter().map(|(_, p)| p.to_string()).collect(),
        }
    }
}

impl fmt::Display for BalancedDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// JSON form of a distribution: 1-based rank lists with matching rational strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexRecord {
    pub support: Vec<Vec<usize>>,
    pub prob: Vec<String>,
}

/// Draws a subset of ranks and maps it to a 0/1 gain vector over identities.
pub fn sample_action<R: Rng + ?Sized>(
    dist: &BalancedDistribution,
    state: &RankedState,
    rng: &mut R,
) -> GainVector {
    let subset = dist.sample_subset(rng);
    gains_for(subset, state)
}

/// Identity-indexed gains for advancing the ranks in `subset`.
pub fn gains_for(subset: RankSet, state: &RankedState) -> GainVector {
    let mut gains = vec![0u8; state.k()];
    for r in subset.iter().take_while(|&r| r < state.k()) {
        gains[state.perm()[r]] = 1;
    }
    GainVector::new(gains).expect("binary by construction")
}
