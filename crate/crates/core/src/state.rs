//! Ranked game states, horizons and the renormalization step.
//!
//! Experts are always re-indexed by decreasing cumulative gain. A state keeps
//! only the gaps behind the leader plus the permutation back to expert
//! identities, so two gain vectors that differ by a common shift map to the
//! same [`RankedState`].

use std::fmt;

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Stopping rule of the game.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HorizonSpec {
    /// Exactly `steps` rounds are played.
    Finite { steps: u32 },
    /// The game stops before each round with probability `delta`.
    Geometric { delta: f64 },
}

impl HorizonSpec {
    pub fn finite(steps: u32) -> Self {
        HorizonSpec::Finite { steps }
    }

    pub fn geometric(delta: f64) -> Result<Self> {
        check_delta(delta)?;
        Ok(HorizonSpec::Geometric { delta })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            HorizonSpec::Finite { .. } => Ok(()),
            HorizonSpec::Geometric { delta } => check_delta(delta),
        }
    }
}

impl fmt::Display for HorizonSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HorizonSpec::Finite { steps } => write!(f, "T={steps}"),
            HorizonSpec::Geometric { delta } => write!(f, "delta={delta}"),
        }
    }
}

/// What a policy knows about the end of the game at the current step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HorizonContext {
    /// `remaining` rounds are left, including the one about to be played.
    Remaining(u32),
    Geometric(f64),
}

pub(crate) fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("delta must lie in (0, 1), got {delta}")))
    }
}

/// A set of ranks (0-based bit positions) advanced together in one round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct RankSet(pub u32);

impl RankSet {
    pub const EMPTY: RankSet = RankSet(0);

    /// Builds a set from 1-based rank labels, as written in `{1}{23}` notation.
    pub fn from_ranks(ranks: &[usize]) -> Self {
        RankSet(ranks.iter().fold(0, |acc, &r| {
            debug_assert!(r >= 1);
            acc | 1 << (r - 1)
        }))
    }

    pub fn full(k: usize) -> Self {
        RankSet(((1u64 << k) - 1) as u32)
    }

    #[inline]
    pub fn contains(self, rank: usize) -> bool {
        self.0 >> rank & 1 == 1
    }

    #[inline]
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// 0-based ranks in increasing order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..32).filter(move |&r| self.contains(r))
    }

    /// 1-based rank labels.
    pub fn labels(self) -> Vec<usize> {
        self.iter().map(|r| r + 1).collect()
    }

    pub fn fits(self, k: usize) -> bool {
        k >= 32 || self.0 >> k == 0
    }
}

impl fmt::Display for RankSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels = self.labels();
        if labels.iter().all(|&l| l < 10) {
            write!(f, "{{")?;
            for l in labels {
                write!(f, "{l}")?;
            }
            write!(f, "}}")
        } else {
            let parts: Vec<String> = labels.iter().map(|l| l.to_string()).collect();
            write!(f, "{{{}}}", parts.join(","))
        }
    }
}

/// Per-expert 0/1 gains of a single round, indexed by expert identity.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GainVector(Vec<u8>);

impl GainVector {
    pub fn new(gains: Vec<u8>) -> Result<Self> {
        if let Some(g) = gains.iter().find(|&&g| g > 1) {
            return Err(Error::InvalidInput(format!("gain {g} is not binary")));
        }
        Ok(GainVector(gains))
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn count(&self) -> usize {
        self.0.iter().filter(|&&g| g == 1).count()
    }
}

/// Normalized configuration of cumulative gains.
///
/// `gaps[i]` is how far the expert of rank `i + 1` trails the leader (rank 0),
/// so `gaps` is sorted ascending. `perm[r]` is the identity of the expert
/// currently holding rank `r`; tied experts are ordered by identity.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RankedState {
    gaps: Vec<u32>,
    perm: Vec<usize>,
}

impl RankedState {
    /// All `k` experts tied, identity permutation.
    pub fn origin(k: usize) -> Self {
        RankedState {
            gaps: vec![0; k.saturating_sub(1)],
            perm: (0..k).collect(),
        }
    }

    /// State with the identity permutation and the given sorted gaps.
    pub fn from_gaps(gaps: &[u32]) -> Result<Self> {
        if gaps.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidInput(format!(
                "gaps {gaps:?} are not sorted ascending"
            )));
        }
        Ok(RankedState {
            gaps: gaps.to_vec(),
            perm: (0..=gaps.len()).collect(),
        })
    }

    pub fn k(&self) -> usize {
        self.perm.len()
    }

    pub fn gaps(&self) -> &[u32] {
        &self.gaps
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    /// Gap of rank `rank` (0-based) behind the leader; 0 for the leader itself.
    #[inline]
    pub fn gap_of(&self, rank: usize) -> u32 {
        if rank == 0 {
            0
        } else {
            self.gaps[rank - 1]
        }
    }

    /// Pairwise gap d_ij between ranks i < j (0-based).
    pub fn pair_gap(&self, i: usize, j: usize) -> u32 {
        self.gap_of(j) - self.gap_of(i)
    }

    /// Cumulative gains by identity, shifted so the trailing expert has zero.
    pub fn to_gains(&self) -> Vec<i64> {
        let top = self.gaps.last().copied().unwrap_or(0) as i64;
        let mut gains = vec![0i64; self.k()];
        for (rank, &id) in self.perm.iter().enumerate() {
            gains[id] = top - self.gap_of(rank) as i64;
        }
        gains
    }

    /// In-place [`apply_ranked_gain`] for the simulation loop; returns the rise
    /// of the maximum (0 or 1).
    pub(crate) fn advance(&mut self, advanced: RankSet) -> u32 {
        let k = self.k();
        let rise = max_rise(self, advanced);
        // (gap after the round, identity); insertion sort keeps it cheap for small k
        let mut buf = [(0i64, 0usize); 32];
        let keyed = &mut buf[..k];
        for (r, slot) in keyed.iter_mut().enumerate() {
            let g = self.gap_of(r) as i64 - advanced.contains(r) as i64 + rise as i64;
            *slot = (g, self.perm[r]);
        }
        for i in 1..k {
            let mut j = i;
            while j > 0 && keyed[j - 1] > keyed[j] {
                keyed.swap(j - 1, j);
                j -= 1;
            }
        }
        for (r, &(g, id)) in keyed.iter().enumerate() {
            self.perm[r] = id;
            if r > 0 {
                self.gaps[r - 1] = g as u32;
            }
        }
        rise
    }

    /// Number of experts tied with the leader, the leader included.
    pub fn leaders(&self) -> usize {
        1 + self.gaps.iter().take_while(|&&g| g == 0).count()
    }
}

impl fmt::Display for RankedState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ids: Vec<usize> = self.perm.iter().map(|p| p + 1).collect();
        write!(f, "gaps={:?} perm={:?}", self.gaps, ids)
    }
}

/// Ranks a vector of cumulative gains (indexed by expert identity).
pub fn rank_state(gains: &[i64]) -> Result<RankedState> {
    if gains.is_empty() {
        return Err(Error::InvalidInput("empty gain vector".into()));
    }
    if let Some(g) = gains.iter().find(|&&g| g < 0) {
        return Err(Error::InvalidInput(format!("negative cumulative gain {g}")));
    }
    Ok(rank_unchecked(gains))
}

/// Ranking without the nonnegativity check; only differences matter.
pub(crate) fn rank_unchecked(gains: &[i64]) -> RankedState {
    let mut perm: Vec<usize> = (0..gains.len()).collect();
    // sort_by_key is stable, so ties keep ascending identity order
    perm.sort_by_key(|&i| std::cmp::Reverse(gains[i]));
    let top = gains[perm[0]];
    let gaps = perm[1..].iter().map(|&i| (top - gains[i]) as u32).collect();
    RankedState { gaps, perm }
}

/// Advances the experts holding the ranks in `advanced` by one and re-ranks.
///
/// Returns the successor together with the one-round change of
/// `max - average` of the raw cumulative gains, i.e. `Δmax - |advanced|/k`.
pub fn apply_ranked_gain(state: &RankedState, advanced: RankSet) -> (RankedState, Rational64) {
    let k = state.k();
    let mut gains = vec![0i64; k];
    let mut new_max = i64::MIN;
    for rank in 0..k {
        let g = -(state.gap_of(rank) as i64) + advanced.contains(rank) as i64;
        gains[state.perm[rank]] = g;
        new_max = new_max.max(g);
    }
    let increment = Rational64::new(new_max * k as i64 - advanced.len() as i64, k as i64);
    (rank_unchecked(&gains), increment)
}

/// Rise of the maximum cumulative gain when `advanced` is played: 1 iff some
/// expert tied with the leader is advanced.
#[inline]
pub fn max_rise(state: &RankedState, advanced: RankSet) -> u32 {
    (0..state.leaders()).any(|r| advanced.contains(r)) as u32
}
