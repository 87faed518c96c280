//! Backward induction over remaining rounds in exact rational arithmetic.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::Zero;
use rayon::prelude::*;

use super::{count_gap_vectors, sorted_gap_vectors, TableEntry, Value, ValueTable};
use crate::adversary::{enumerate_vertices, BalancedDistribution};
use crate::error::{Error, Result};
use crate::state::{apply_ranked_gain, HorizonSpec, RankSet, RankedState};

/// Default bound on the number of tabulated (state, remaining) pairs.
pub const DEFAULT_STATE_CAP: u64 = 5_000_000;

pub fn solve_finite(k: usize, horizon: u32) -> Result<ValueTable> {
    solve_finite_with_cap(k, horizon, DEFAULT_STATE_CAP)
}

fn big(r: Rational64) -> BigRational {
    BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

pub fn solve_finite_with_cap(k: usize, horizon: u32, cap: u64) -> Result<ValueTable> {
    let vertices = enumerate_vertices(k)?;
    // layer l holds C(l + k - 1, k - 1) states; summing over l gives C(T + k, k)
    let states = count_gap_vectors(k, horizon);
    if states > cap as u128 {
        return Err(Error::ResourceCap {
            states: states.min(u64::MAX as u128) as u64,
            cap,
        });
    }

    let mut entries: Vec<TableEntry> = vec![TableEntry {
        gaps: vec![0; k - 1],
        remaining: Some(0),
        value: Value::Exact(BigRational::zero()),
        best_actions: (0..vertices.len()).collect(),
    }];
    let mut prev: HashMap<Vec<u32>, BigRational> = HashMap::from([(vec![0; k - 1], BigRational::zero())]);

    for l in 1..=horizon {
        let layer = sorted_gap_vectors(k - 1, l);
        let solved: Vec<(Vec<u32>, BigRational, Vec<usize>)> = layer
            .into_par_iter()
            .map(|gaps| {
                let (v, best) = backup(&gaps, l, &vertices, &prev);
                (gaps, v, best)
            })
            .collect();
        prev = HashMap::with_capacity(solved.len());
        for (gaps, value, best_actions) in solved {
            prev.insert(gaps.clone(), value.clone());
            entries.push(TableEntry {
                gaps,
                remaining: Some(l),
                value: Value::Exact(value),
                best_actions,
            });
        }
    }
    Ok(ValueTable::new(
        k,
        HorizonSpec::finite(horizon),
        vertices,
        entries,
    ))
}

/// One Bellman backup at `gaps` with `l` rounds left against layer `l - 1`.
fn backup(
    gaps: &[u32],
    l: u32,
    vertices: &[BalancedDistribution],
    prev: &HashMap<Vec<u32>, BigRational>,
) -> (BigRational, Vec<usize>) {
    let state = RankedState::from_gaps(gaps).expect("sorted");
    let mut outcome: HashMap<RankSet, BigRational> = HashMap::new();
    let mut q_of = |set: RankSet| -> BigRational {
        outcome
            .entry(set)
            .or_insert_with(|| {
                let (next, inc) = apply_ranked_gain(&state, set);
                let key: Vec<u32> = next.gaps().iter().map(|&g| g.min(l - 1)).collect();
                big(inc) + &prev[&key]
            })
            .clone()
    };
    let qs: Vec<BigRational> = vertices
        .iter()
        .map(|v| {
            v.support()
                .iter()
                .map(|&(set, p)| big(p) * q_of(set))
                .fold(BigRational::zero(), |a, b| a + b)
        })
        .collect();
    let best = qs.iter().max().expect("at least one vertex").clone();
    let best_actions = (0..qs.len()).filter(|&i| qs[i] == best).collect();
    (best, best_actions)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn two_experts_small_horizons() {
        let t = solve_finite(2, 3).unwrap();
        assert_eq!(t.value(&[0], Some(1)).unwrap(), &Value::Exact(q(1, 2)));
        assert_eq!(t.value(&[0], Some(2)).unwrap(), &Value::Exact(q(1, 2)));
        assert_eq!(t.value(&[0], Some(3)).unwrap(), &Value::Exact(q(3, 4)));
        assert_eq!(t.minimax_regret(), &Value::Exact(q(3, 4)));
        // clamped lookups
        assert_eq!(t.value(&[50], Some(3)).unwrap(), &Value::Exact(q(0, 1)));
    }

    #[test]
    fn zero_horizon() {
        let t = solve_finite(3, 0).unwrap();
        assert_eq!(t.minimax_regret(), &Value::Exact(q(0, 1)));
    }

    #[test]
    fn three_experts_last_round() {
        let t = solve_finite(3, 1).unwrap();
        let at = |g: &[u32]| {
            let e = t.entry(g, Some(1)).unwrap();
            let mut l = t.best_labels(e);
            l.sort();
            (e.value.clone(), l)
        };
        assert_eq!(
            at(&[0, 0]),
            (Value::Exact(q(2, 3)), vec!["{1}{2}{3}".to_string()])
        );
        let (v, labels) = at(&[0, 1]);
        assert_eq!(v, Value::Exact(q(1, 2)));
        assert_eq!(labels, vec!["{1}{23}", "{2}{13}"]);
        // the leader alone on top: every balanced move earns zero
        let (v, labels) = at(&[1, 1]);
        assert_eq!(v, Value::Exact(q(0, 1)));
        assert_eq!(labels.len(), 7);
    }

    #[test]
    fn resource_cap() {
        let r = solve_finite_with_cap(4, 100, 1000);
        assert!(matches!(r, Err(Error::ResourceCap { cap: 1000, .. })));
        assert!(matches!(solve_finite(5, 2), Err(Error::Unsupported(_))));
    }
}
