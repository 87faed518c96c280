//! Vertices of the polytope of balanced distributions over advance-subsets.
//!
//! A vertex satisfies `k` independent equalities (normalization plus `k - 1`
//! balance rows) with nonnegativity, so it has at most `k` subsets in its
//! support. Every candidate support is solved exactly; a support whose
//! square-or-tall system has a unique, strictly positive solution is a vertex.

use itertools::Itertools;
use num_rational::Rational64;
use num_traits::{One, Zero};

use super::distribution::{ActionDistribution, BalancedDistribution, VertexRecord};
use crate::error::{Error, Result};
use crate::state::RankSet;

pub const MAX_ENUMERATION_K: usize = 4;

pub fn enumerate_vertices(k: usize) -> Result<Vec<BalancedDistribution>> {
    if !(2..=MAX_ENUMERATION_K).contains(&k) {
        return Err(Error::Unsupported(format!(
            "vertex enumeration needs 2 <= k <= {MAX_ENUMERATION_K}, got {k}"
        )));
    }
    let subsets: Vec<RankSet> = (0..1u32 << k).map(RankSet).collect();
    let mut vertices = Vec::new();
    for m in 1..=k {
        for support in subsets.iter().copied().combinations(m) {
            let Some(probs) = solve_support(k, &support) else {
                continue;
            };
            if probs.iter().any(|p| *p <= Rational64::zero()) {
                continue;
            }
            let dist = ActionDistribution::new(k, support.into_iter().zip(probs).collect())
                .expect("solution of the normalization row sums to one");
            vertices.push(BalancedDistribution::try_new(dist).expect("balance rows hold"));
        }
    }
    vertices.sort_by_key(|v| {
        let mut sets = v.subsets();
        sets.sort_by_key(|s| (s.len(), s.labels()));
        (sets.len(), sets.iter().map(|s| s.labels()).collect::<Vec<_>>())
    });
    Ok(vertices)
}

/// Constraint rows restricted to `support`: normalization, then rank-i minus rank-0 balance.
fn constraint_matrix(k: usize, support: &[RankSet]) -> Vec<Vec<Rational64>> {
    let mut rows = Vec::with_capacity(k);
    let mut norm: Vec<Rational64> = vec![Rational64::one(); support.len()];
    norm.push(Rational64::one());
    rows.push(norm);
    for i in 1..k {
        let mut row: Vec<Rational64> = support
            .iter()
            .map(|s| Rational64::from_integer(s.contains(i) as i64 - s.contains(0) as i64))
            .collect();
        row.push(Rational64::zero());
        rows.push(row);
    }
    rows
}

/// Reduces an augmented matrix in place; returns pivot columns, or `None` if inconsistent.
fn row_reduce(a: &mut [Vec<Rational64>], cols: usize) -> Option<Vec<usize>> {
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        let Some(p) = (row..a.len()).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(row, p);
        let inv = a[row][col].recip();
        for v in a[row].iter_mut() {
            *v *= inv;
        }
        let pivot = a[row].clone();
        for (r, line) in a.iter_mut().enumerate() {
            if r != row && !line[col].is_zero() {
                let factor = line[col];
                for (x, &p) in line.iter_mut().zip(&pivot) {
                    *x -= factor * p;
                }
            }
        }
        pivots.push(col);
        row += 1;
        if row == a.len() {
            break;
        }
    }
    // a zero row with a nonzero right-hand side means no solution
    if a[row..].iter().any(|r| !r[cols].is_zero()) {
        return None;
    }
    Some(pivots)
}

/// Unique exact solution of the balance system on `support`, if it exists.
pub fn solve_support(k: usize, support: &[RankSet]) -> Option<Vec<Rational64>> {
    let m = support.len();
    let mut a = constraint_matrix(k, support);
    let pivots = row_reduce(&mut a, m)?;
    if pivots.len() < m {
        return None;
    }
    Some((0..m).map(|i| a[i][m]).collect())
}

/// A balanced distribution is extreme iff the constraint columns of its
/// support are linearly independent.
pub fn is_extreme(dist: &BalancedDistribution) -> bool {
    let support = dist.subsets();
    let mut a = constraint_matrix(dist.k(), &support);
    row_reduce(&mut a, support.len()).is_some_and(|p| p.len() == support.len())
}

/// Position of `dist` in `vertices`, comparing support and probabilities.
pub fn vertex_index(vertices: &[BalancedDistribution], dist: &BalancedDistribution) -> Option<usize> {
    vertices.iter().position(|v| v.same_as(dist))
}

pub fn vertex_records(vertices: &[BalancedDistribution]) -> Vec<VertexRecord> {
    vertices.iter().map(BalancedDistribution::to_record).collect()
}

pub fn vertices_json(k: usize) -> Result<String> {
    Ok(serde_json::to_string_pretty(&vertex_records(
        &enumerate_vertices(k)?,
    ))?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(vs: &[BalancedDistribution]) -> Vec<String> {
        vs.iter().map(|v| v.label()).collect()
    }

    #[test]
    fn two_experts() {
        let vs = enumerate_vertices(2).unwrap();
        assert_eq!(labels(&vs), vec!["{}", "{12}", "{1}{2}"]);
        assert_eq!(vs[2].rate(), Rational64::new(1, 2));
    }

    #[test]
    fn three_experts() {
        let vs = enumerate_vertices(3).unwrap();
        let mut got = labels(&vs);
        got.sort();
        let mut want = vec![
            "{}",
            "{123}",
            "{1}{23}",
            "{2}{13}",
            "{3}{12}",
            "{1}{2}{3}",
            "{12}{13}{23}",
        ];
        want.sort();
        assert_eq!(got, want);
    }

    #[test]
    fn out_of_range() {
        assert!(matches!(enumerate_vertices(1), Err(Error::Unsupported(_))));
        assert!(matches!(enumerate_vertices(5), Err(Error::Unsupported(_))));
    }

    #[test]
    fn every_vertex_is_extreme() {
        for k in 2..=4 {
            for v in enumerate_vertices(k).unwrap() {
                assert!(is_extreme(&v), "{v}");
                // dropping any subset leaves no positive balanced solution on the rest
                let sets = v.subsets();
                for skip in 0..sets.len() {
                    let rest: Vec<RankSet> = sets
                        .iter()
                        .enumerate()
                        .filter(|&(i, _)| i != skip)
                        .map(|(_, &s)| s)
                        .collect();
                    if rest.is_empty() {
                        continue;
                    }
                    let sol = solve_support(k, &rest);
                    assert!(
                        sol.is_none_or(|p| p.iter().any(|x| *x <= Rational64::zero())),
                        "{v} minus subset {skip} stays feasible"
                    );
                }
            }
        }
    }

    #[test]
    fn interior_point_is_not_extreme() {
        let d = BalancedDistribution::from_literal(
            2,
            &[
                (&[], Rational64::new(1, 2)),
                (&[1], Rational64::new(1, 4)),
                (&[2], Rational64::new(1, 4)),
            ],
        );
        assert!(!is_extreme(&d));
    }
}
