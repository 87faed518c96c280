//! Value iteration for the geometric horizon on a truncated gap grid.

use std::collections::HashMap;

use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use super::{count_gap_vectors, sorted_gap_vectors, TableEntry, Value, ValueTable};
use crate::adversary::enumerate_vertices;
use crate::error::{Error, Result};
use crate::roots::characteristic_roots;
use crate::state::{apply_ranked_gain, check_delta, HorizonSpec, RankSet, RankedState};

/// Largest k for which the geometric solver runs.
pub const MAX_GEOMETRIC_K: usize = 3;

/// Constant in the truncation bound C·ξ^D/(ξ1 − ξ2).
const TRUNCATION_CONSTANT: f64 = 4.0 / 3.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometricOptions {
    /// Also iterate until every state's value changes by less than this
    /// fraction of itself, so that far-from-the-leader states, whose values
    /// are tiny, are resolved well enough to rank adversary moves.
    pub rel_tol: f64,
    /// Moves whose value is within this fraction of the best count as optimal.
    pub tie_tol: f64,
    pub max_iterations: u64,
    pub state_cap: u64,
}

impl Default for GeometricOptions {
    fn default() -> Self {
        GeometricOptions {
            rel_tol: 1e-12,
            tie_tol: 1e-9,
            max_iterations: 1_000_000,
            state_cap: 2_000_000,
        }
    }
}

pub fn solve_geometric(k: usize, delta: f64, gap_cap: u32, tol: f64) -> Result<ValueTable> {
    solve_geometric_with(k, delta, gap_cap, tol, GeometricOptions::default())
}

/// One outcome of one vertex: probability and successor index (`None` past the cap).
struct Branch {
    p: f64,
    next: Option<usize>,
}

struct Move {
    /// Expected one-round increment, computed exactly then rounded.
    inc: f64,
    branches: Vec<Branch>,
}

pub fn required_gap_cap(delta: f64, tol: f64) -> Result<u32> {
    let roots = characteristic_roots(delta)?;
    let d = (tol * roots.spread() / TRUNCATION_CONSTANT).ln() / roots.xi2.ln();
    Ok(d.ceil().max(1.0) as u32)
}

pub fn solve_geometric_with(
    k: usize,
    delta: f64,
    gap_cap: u32,
    tol: f64,
    opts: GeometricOptions,
) -> Result<ValueTable> {
    if !(2..=MAX_GEOMETRIC_K).contains(&k) {
        return Err(Error::Unsupported(format!(
            "geometric solver supports k=2 or k=3, got {k}"
        )));
    }
    check_delta(delta)?;
    if gap_cap < 1 {
        return Err(Error::InvalidInput("gap cap must be at least 1".into()));
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidInput(format!("tol must be positive, got {tol}")));
    }
    let roots = characteristic_roots(delta)?;
    let bound = TRUNCATION_CONSTANT * roots.decay(gap_cap) / roots.spread();
    if bound > tol {
        return Err(Error::GapCapTooSmall {
            gap_cap,
            required: required_gap_cap(delta, tol)?,
            bound,
            tol,
        });
    }
    let states = count_gap_vectors(k - 1, gap_cap);
    if states > opts.state_cap as u128 {
        return Err(Error::ResourceCap {
            states: states.min(u64::MAX as u128) as u64,
            cap: opts.state_cap,
        });
    }

    let vertices = enumerate_vertices(k)?;
    let grid = sorted_gap_vectors(k - 1, gap_cap);
    let index: HashMap<&[u32], usize> = grid.iter().enumerate().map(|(i, g)| (g.as_slice(), i)).collect();
    let moves: Vec<Vec<Move>> = grid
        .iter()
        .map(|gaps| {
            let state = RankedState::from_gaps(gaps).expect("sorted");
            vertices
                .iter()
                .map(|v| {
                    let mut inc = Rational64::zero();
                    let branches = v
                        .support()
                        .iter()
                        .map(|&(set, p): &(RankSet, Rational64)| {
                            let (next, step) = apply_ranked_gain(&state, set);
                            inc += p * step;
                            Branch {
                                p: p.to_f64().unwrap(),
                                next: index.get(next.gaps()).copied(),
                            }
                        })
                        .collect();
                    Move {
                        inc: inc.to_f64().unwrap(),
                        branches,
                    }
                })
                .collect()
        })
        .collect();

    let keep = 1.0 - delta;
    let q = |ms: &Move, v: &[f64]| -> f64 {
        ms.inc
            + ms.branches
                .iter()
                .map(|b| b.next.map_or(0.0, |n| b.p * v[n]))
                .sum::<f64>()
    };
    let mut v = vec![0.0; grid.len()];
    let mut last_diff = f64::INFINITY;
    let mut iterations = 0u64;
    loop {
        let next: Vec<f64> = moves
            .par_iter()
            .map(|ms| keep * ms.iter().map(|m| q(m, &v)).fold(f64::NEG_INFINITY, f64::max))
            .collect();
        let mut diff = 0.0f64;
        let mut rel = 0.0f64;
        for (a, b) in next.iter().zip(&v) {
            let d = (a - b).abs();
            diff = diff.max(d);
            if *a != 0.0 {
                rel = rel.max(d / a.abs());
            }
        }
        // sup-norm contraction with factor (1 - delta), up to rounding
        assert!(
            diff <= keep * last_diff + 1e-12,
            "value iteration failed to contract: {diff} after {last_diff}"
        );
        v = next;
        last_diff = diff;
        iterations += 1;
        let converged = diff < tol * delta;
        if converged && (rel < opts.rel_tol || iterations >= opts.max_iterations) {
            break;
        }
        if iterations >= opts.max_iterations {
            break;
        }
    }

    let entries = grid
        .iter()
        .zip(&moves)
        .zip(&v)
        .map(|((gaps, ms), &value)| {
            let qs: Vec<f64> = ms.iter().map(|m| keep * q(m, &v)).collect();
            let best = qs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let slack = opts.tie_tol * best.abs();
            TableEntry {
                gaps: gaps.clone(),
                remaining: None,
                value: Value::Float(value),
                best_actions: (0..qs.len()).filter(|&i| qs[i] >= best - slack).collect(),
            }
        })
        .collect();
    let mut table = ValueTable::new(k, HorizonSpec::Geometric { delta }, vertices, entries);
    table.gap_cap = Some(gap_cap);
    table.truncation_bound = Some(bound);
    table.iterations = Some(iterations);
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_experts_origin() {
        let t = solve_geometric(2, 0.5, 60, 1e-9).unwrap();
        assert!((t.minimax_regret().to_f64() - 0.2886751).abs() < 1e-6);
    }

    #[test]
    fn three_experts_origin() {
        let t = solve_geometric(3, 0.5, 60, 1e-9).unwrap();
        assert!((t.minimax_regret().to_f64() - 0.3849002).abs() < 1e-5);
        assert_eq!(t.best_labels(t.origin()), vec!["{1}{2}{3}"]);
    }

    #[test]
    fn cap_too_small_reports_requirement() {
        match solve_geometric(2, 0.01, 10, 1e-9) {
            Err(Error::GapCapTooSmall { required, .. }) => {
                assert!(solve_geometric(2, 0.01, required, 1e-9).is_ok());
                assert!(matches!(
                    solve_geometric(2, 0.01, required - 1, 1e-9),
                    Err(Error::GapCapTooSmall { .. })
                ));
            }
            other => panic!("expected GapCapTooSmall, got {other:?}"),
        }
    }

    #[test]
    fn argument_errors() {
        assert!(matches!(
            solve_geometric(4, 0.5, 10, 1e-3),
            Err(Error::Unsupported(_))
        ));
        assert!(matches!(solve_geometric(2, 1.5, 10, 1e-3), Err(Error::Domain(_))));
        assert!(matches!(
            solve_geometric(2, 0.5, 0, 1e-3),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            solve_geometric(2, 0.5, 10, 0.0),
            Err(Error::InvalidInput(_))
        ));
    }
}
