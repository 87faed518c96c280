//! Concrete adversaries, all defined over ranks.

use num_rational::Rational64;

use super::distribution::{ActionDistribution, BalancedDistribution};
use crate::error::{Error, Result};
use crate::state::{HorizonContext, RankSet, RankedState};

/// A balanced, oblivious adversary: a rule from the current ranked state to a
/// distribution over advance-subsets.
pub trait Adversary: Send + Sync {
    fn k(&self) -> usize;

    fn name(&self) -> String;

    fn distribution(&self, state: &RankedState, ctx: HorizonContext) -> BalancedDistribution;

    /// True when the output never depends on the state or the horizon.
    fn is_state_independent(&self) -> bool {
        false
    }
}

fn half() -> Rational64 {
    Rational64::new(1, 2)
}

fn one_vs_rest(k: usize) -> BalancedDistribution {
    let rest = RankSet(RankSet::full(k).0 & !1);
    BalancedDistribution::try_new(
        ActionDistribution::new(k, vec![(RankSet(1), half()), (rest, half())]).unwrap(),
    )
    .unwrap()
}

fn singletons(k: usize) -> BalancedDistribution {
    let sets: Vec<RankSet> = (0..k).map(|r| RankSet(1 << r)).collect();
    BalancedDistribution::try_new(ActionDistribution::uniform(k, &sets).unwrap()).unwrap()
}

/// Two experts: advance one of them uniformly at random.
#[derive(Debug, Clone)]
pub struct Cover {
    dist: BalancedDistribution,
}

pub fn cover_adversary() -> Cover {
    Cover { dist: singletons(2) }
}

impl Adversary for Cover {
    fn k(&self) -> usize {
        2
    }
    fn name(&self) -> String {
        "cover".into()
    }
    fn distribution(&self, _: &RankedState, _: HorizonContext) -> BalancedDistribution {
        self.dist.clone()
    }
    fn is_state_independent(&self) -> bool {
        true
    }
}

/// Optimal three-expert adversary for the geometric horizon.
///
/// Plays `{1}{23}` whenever the trailing expert is strictly behind the
/// leader and `{1}{2}{3}` when all three are tied.
#[derive(Debug, Clone)]
pub struct Optimal3 {
    split: BalancedDistribution,
    spread: BalancedDistribution,
}

pub fn optimal3_adversary() -> Optimal3 {
    Optimal3 {
        split: one_vs_rest(3),
        spread: singletons(3),
    }
}

impl Adversary for Optimal3 {
    fn k(&self) -> usize {
        3
    }
    fn name(&self) -> String {
        "optimal3".into()
    }
    fn distribution(&self, state: &RankedState, _: HorizonContext) -> BalancedDistribution {
        if state.gaps()[1] > 0 {
            self.split.clone()
        } else {
            self.spread.clone()
        }
    }
}

/// How the comb adversary orders experts that are tied in cumulative gain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    /// Use the ranked-state order (ascending identity).
    #[default]
    Stable,
    /// Reverse the order inside every group of tied experts.
    ReverseTies,
}

/// Advances either all odd ranks or all even ranks, each with probability 1/2.
#[derive(Debug, Clone)]
pub struct Comb {
    k: usize,
    tie_break: TieBreak,
    teams: [RankSet; 2],
}

pub fn comb_adversary(k: usize) -> Result<Comb> {
    comb_adversary_with(k, TieBreak::Stable)
}

pub fn comb_adversary_with(k: usize, tie_break: TieBreak) -> Result<Comb> {
    if !(2..=31).contains(&k) {
        return Err(Error::InvalidInput(format!(
            "comb adversary needs 2 <= k <= 31, got {k}"
        )));
    }
    let odd = (0..k).step_by(2).fold(0, |acc, r| acc | 1 << r);
    let even = (1..k).step_by(2).fold(0, |acc, r| acc | 1 << r);
    Ok(Comb {
        k,
        tie_break,
        teams: [RankSet(odd), RankSet(even)],
    })
}

impl Comb {
    fn reorder(&self, state: &RankedState, set: RankSet) -> RankSet {
        // within each run of equal gaps, rank r maps to its mirror image
        let mut out = 0u32;
        let mut start = 0;
        while start < self.k {
            let mut end = start + 1;
            while end < self.k && state.gap_of(end) == state.gap_of(start) {
                end += 1;
            }
            for r in start..end {
                if set.contains(r) {
                    out |= 1 << (start + end - 1 - r);
                }
            }
            start = end;
        }
        RankSet(out)
    }
}

impl Adversary for Comb {
    fn k(&self) -> usize {
        self.k
    }
    fn name(&self) -> String {
        match self.tie_break {
            TieBreak::Stable => "comb".into(),
            TieBreak::ReverseTies => "comb:ties=reverse".into(),
        }
    }
    fn distribution(&self, state: &RankedState, _: HorizonContext) -> BalancedDistribution {
        let teams = match self.tie_break {
            TieBreak::Stable => self.teams,
            TieBreak::ReverseTies => self.teams.map(|t| self.reorder(state, t)),
        };
        BalancedDistribution::try_new(
            ActionDistribution::new(self.k, vec![(teams[0], half()), (teams[1], half())]).unwrap(),
        )
        .unwrap()
    }
    fn is_state_independent(&self) -> bool {
        self.tie_break == TieBreak::Stable
    }
}

/// Advances a single uniformly chosen expert.
#[derive(Debug, Clone)]
pub struct OneHot {
    k: usize,
    dist: BalancedDistribution,
}

pub fn one_hot_adversary(k: usize) -> Result<OneHot> {
    if !(1..=31).contains(&k) {
        return Err(Error::InvalidInput(format!(
            "one-hot adversary needs 1 <= k <= 31, got {k}"
        )));
    }
    Ok(OneHot {
        k,
        dist: singletons(k),
    })
}

impl Adversary for OneHot {
    fn k(&self) -> usize {
        self.k
    }
    fn name(&self) -> String {
        "onehot".into()
    }
    fn distribution(&self, _: &RankedState, _: HorizonContext) -> BalancedDistribution {
        self.dist.clone()
    }
    fn is_state_independent(&self) -> bool {
        true
    }
}

/// Optimal three-expert move when a single round remains.
///
/// `{1}{2}{3}` if all tied; `{1}{23}` otherwise (with the top two tied this is
/// one of the two optimal choices, otherwise every balanced move is optimal).
pub fn last_step3_adversary(state: &RankedState) -> Result<BalancedDistribution> {
    if state.k() != 3 {
        return Err(Error::InvalidInput(format!(
            "last-step adversary is defined for k=3, got k={}",
            state.k()
        )));
    }
    Ok(if state.gaps() == [0, 0] {
        singletons(3)
    } else {
        one_vs_rest(3)
    })
}

#[derive(Debug, Clone, Default)]
pub struct LastStep3;

impl Adversary for LastStep3 {
    fn k(&self) -> usize {
        3
    }
    fn name(&self) -> String {
        "last-step3".into()
    }
    fn distribution(&self, state: &RankedState, _: HorizonContext) -> BalancedDistribution {
        last_step3_adversary(state).expect("k=3 state")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::distribution::is_balanced;

    fn r(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    fn ctx() -> HorizonContext {
        HorizonContext::Geometric(0.1)
    }

    fn lit(k: usize, parts: &[(&[usize], Rational64)]) -> BalancedDistribution {
        BalancedDistribution::from_literal(k, parts)
    }

    #[test]
    fn cover_is_state_independent() {
        let c = cover_adversary();
        let want = lit(2, &[(&[1], r(1, 2)), (&[2], r(1, 2))]);
        for g in [0, 5] {
            let s = RankedState::from_gaps(&[g]).unwrap();
            let d = c.distribution(&s, ctx());
            assert!(d.same_as(&want));
            assert!(is_balanced(d.inner()).0);
        }
    }

    #[test]
    fn optimal3_cases() {
        let a = optimal3_adversary();
        let spread = lit(3, &[(&[1], r(1, 3)), (&[2], r(1, 3)), (&[3], r(1, 3))]);
        let split = lit(3, &[(&[1], r(1, 2)), (&[2, 3], r(1, 2))]);
        let at = |g: &[u32]| a.distribution(&RankedState::from_gaps(g).unwrap(), ctx());
        assert!(at(&[0, 0]).same_as(&spread));
        assert!(at(&[1, 3]).same_as(&split));
        assert!(at(&[2, 2]).same_as(&split));
        assert!(at(&[0, 4]).same_as(&split));
    }

    #[test]
    fn comb_teams() {
        let s4 = RankedState::from_gaps(&[1, 2, 7]).unwrap();
        let d = comb_adversary(4).unwrap().distribution(&s4, ctx());
        assert!(d.same_as(&lit(4, &[(&[1, 3], r(1, 2)), (&[2, 4], r(1, 2))])));

        let s3 = RankedState::from_gaps(&[0, 3]).unwrap();
        let d = comb_adversary(3).unwrap().distribution(&s3, ctx());
        assert!(d.same_as(&lit(3, &[(&[1, 3], r(1, 2)), (&[2], r(1, 2))])));

        let d = comb_adversary(2)
            .unwrap()
            .distribution(&RankedState::origin(2), ctx());
        assert!(d.same_as(&cover_adversary().distribution(&RankedState::origin(2), ctx())));
    }

    #[test]
    fn comb_reverse_ties() {
        let comb = comb_adversary_with(3, TieBreak::ReverseTies).unwrap();
        // ranks 2 and 3 tied: {13} becomes {12}, {2} becomes {3}
        let s = RankedState::from_gaps(&[1, 1]).unwrap();
        let d = comb.distribution(&s, ctx());
        assert!(d.same_as(&lit(3, &[(&[1, 2], r(1, 2)), (&[3], r(1, 2))])));
        // no ties: unchanged
        let s = RankedState::from_gaps(&[1, 2]).unwrap();
        let d = comb.distribution(&s, ctx());
        assert!(d.same_as(&lit(3, &[(&[1, 3], r(1, 2)), (&[2], r(1, 2))])));
    }

    #[test]
    fn last_step_cases() {
        let spread = lit(3, &[(&[1], r(1, 3)), (&[2], r(1, 3)), (&[3], r(1, 3))]);
        let split = lit(3, &[(&[1], r(1, 2)), (&[2, 3], r(1, 2))]);
        let at = |g: &[u32]| last_step3_adversary(&RankedState::from_gaps(g).unwrap()).unwrap();
        assert!(at(&[0, 0]).same_as(&spread));
        assert!(at(&[0, 4]).same_as(&split));
        assert!(at(&[2, 5]).same_as(&split));
        assert!(last_step3_adversary(&RankedState::origin(2)).is_err());
    }

    #[test]
    fn one_hot_is_uniform() {
        let d = one_hot_adversary(4)
            .unwrap()
            .distribution(&RankedState::origin(4), ctx());
        assert_eq!(d.support().len(), 4);
        assert_eq!(d.rate(), r(1, 4));
    }
}
