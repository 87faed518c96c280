//! Residuals of the recurrences satisfied by the minimax value, indifference
//! of the three-expert adversary, and the two-expert policy read off a table.

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use super::closed::geometric_regret_closed;
use super::finite::solve_finite;
use super::{Value, ValueTable};
use crate::algorithm::opt3_geometric_policy;
use crate::error::{Error, Result};
use crate::state::{apply_ranked_gain, check_delta, max_rise, HorizonSpec, RankSet, RankedState};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub max_residual: f64,
    pub points: usize,
    /// Where the largest residual occurred.
    pub worst: String,
    /// For exact (finite-horizon) checks: whether every residual is exactly zero.
    pub exact_zero: Option<bool>,
}

#[derive(Default)]
struct Tracker {
    max: f64,
    points: usize,
    worst: String,
}

impl Tracker {
    fn push(&mut self, residual: f64, at: impl FnOnce() -> String) {
        self.points += 1;
        if residual > self.max || self.points == 1 {
            self.max = self.max.max(residual);
            self.worst = at();
        }
    }

    fn report(self, exact_zero: Option<bool>) -> ResidualReport {
        ResidualReport {
            max_residual: self.max,
            points: self.points,
            worst: self.worst,
            exact_zero,
        }
    }
}

/// Evaluates every recurrence of the minimax value on gaps up to `max_gap`.
///
/// Geometric, k=2: the interior averaging equation and the boundary equation
/// at a tie, for the closed form. Geometric, k=3: both interior averaging
/// equations, plus the full max-over-moves equation (player using the
/// optimal three-expert policy) at every state, boundaries included.
/// Finite, k=2: the solver's table against the random-walk recurrence, in
/// exact arithmetic, for every remaining count up to the horizon.
pub fn check_recurrences(k: usize, horizon: HorizonSpec, max_gap: u32) -> Result<ResidualReport> {
    match (k, horizon) {
        (2, HorizonSpec::Geometric { delta }) => {
            check_delta(delta)?;
            let f = |d: u32| geometric_regret_closed(2, delta, &[d]).unwrap();
            let keep = 1.0 - delta;
            let mut t = Tracker::default();
            t.push((f(0) - keep * (f(1) + 0.5)).abs(), || "d=0".into());
            for d in 1..=max_gap {
                let r = (f(d) - keep * (f(d - 1) + f(d + 1)) / 2.0).abs();
                t.push(r, || format!("d={d}"));
            }
            Ok(t.report(None))
        }
        (3, HorizonSpec::Geometric { delta }) => {
            check_delta(delta)?;
            let f = |a: u32, b: u32| geometric_regret_closed(3, delta, &[a, b]).unwrap();
            let keep = 1.0 - delta;
            let mut t = Tracker::default();
            for d13 in 0..=max_gap {
                for d12 in 0..=d13 {
                    if 0 < d12 && d12 < d13 {
                        let here = f(d12, d13);
                        let lateral = keep * (f(d12 + 1, d13) + f(d12 - 1, d13)) / 2.0;
                        let diagonal = keep * (f(d12 + 1, d13 + 1) + f(d12 - 1, d13 - 1)) / 2.0;
                        t.push((here - lateral).abs(), || format!("lateral ({d12},{d13})"));
                        t.push((here - diagonal).abs(), || format!("diagonal ({d12},{d13})"));
                    }
                    let lines = line_values3(delta, d12, d13)?;
                    let best = lines.iter().map(|l| l.1).fold(f64::NEG_INFINITY, f64::max);
                    t.push((f(d12, d13) - best).abs(), || format!("max ({d12},{d13})"));
                }
            }
            Ok(t.report(None))
        }
        (2, HorizonSpec::Finite { steps }) => {
            let table = solve_finite(2, steps)?;
            let v = |d: u32, l: u32| -> BigRational {
                table
                    .value(&[d], Some(l))
                    .and_then(Value::exact)
                    .cloned()
                    .expect("tabulated")
            };
            let half = BigRational::new(1.into(), 2.into());
            let mut t = Tracker::default();
            let mut all_zero = true;
            let mut push = |r: BigRational, at: String, t: &mut Tracker| {
                all_zero &= r.is_zero();
                t.push(r.abs().to_f64().unwrap_or(f64::INFINITY), || at);
            };
            for d in 0..=max_gap {
                push(v(d, 0), format!("d={d} l=0"), &mut t);
                for l in 1..=steps {
                    let rhs = if d == 0 {
                        v(1, l - 1) + &half
                    } else {
                        (v(d - 1, l - 1) + v(d + 1, l - 1)) / BigRational::from_integer(2.into())
                    };
                    push(v(d, l) - rhs, format!("d={d} l={l}"), &mut t);
                }
            }
            Ok(t.report(Some(all_zero)))
        }
        _ => Err(Error::Unsupported(format!(
            "no recurrence check for k={k} with horizon {horizon}"
        ))),
    }
}

/// Discounted right-hand side of every move ("line") of the three-expert
/// geometric recurrence at (d12, d13):
/// (1 − δ)·(f(successor) + rise of the max − Σ p over advanced ranks),
/// with f the closed form and p the optimal three-expert policy.
pub fn line_values3(delta: f64, d12: u32, d13: u32) -> Result<Vec<(RankSet, f64)>> {
    let p = opt3_geometric_policy(d12, d13, delta)?;
    let p = p.as_slice();
    let state = RankedState::from_gaps(&[d12, d13])?;
    let keep = 1.0 - delta;
    (0..8u32)
        .map(|mask| {
            let set = RankSet(mask);
            let (next, _) = apply_ranked_gain(&state, set);
            let f = geometric_regret_closed(3, delta, next.gaps())?;
            let paid: f64 = set.iter().map(|r| p[r]).sum();
            Ok((set, keep * (f + max_rise(&state, set) as f64 - paid)))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndifferenceReport {
    pub gaps: [u32; 2],
    pub lhs: f64,
    /// |line − lhs| for the moves {1}, {23}, {13}, {2}.
    pub equalities: Vec<(String, f64)>,
    /// lhs − line for the moves {12}, {3}, {123}, {}; must be >= 0.
    pub inequalities: Vec<(String, f64)>,
    pub max_residual: f64,
    pub inequalities_hold: bool,
}

/// At an interior state (0 < d12 < d13) the optimal policy must leave the
/// adversary indifferent between {1}, {23}, {13} and {2}, and no other move may
/// do better.
pub fn check_indifference3(delta: f64, d12: u32, d13: u32) -> Result<IndifferenceReport> {
    if !(0 < d12 && d12 < d13) {
        return Err(Error::Domain(format!(
            "indifference check needs 0 < d12 < d13, got ({d12}, {d13})"
        )));
    }
    let lines = line_values3(delta, d12, d13)?;
    let lhs = geometric_regret_closed(3, delta, &[d12, d13])?;
    let line = |ranks: &[usize]| lines[RankSet::from_ranks(ranks).0 as usize].1;
    let equalities: Vec<(String, f64)> = [&[1][..], &[2, 3], &[1, 3], &[2]]
        .iter()
        .map(|r| (RankSet::from_ranks(r).to_string(), (line(r) - lhs).abs()))
        .collect();
    let inequalities: Vec<(String, f64)> = [&[1, 2][..], &[3], &[1, 2, 3], &[]]
        .iter()
        .map(|r| (RankSet::from_ranks(r).to_string(), lhs - line(r)))
        .collect();
    let max_residual = equalities.iter().map(|e| e.1).fold(0.0, f64::max);
    // allow rounding noise on lines that tie with the left-hand side
    let inequalities_hold = inequalities.iter().all(|e| e.1 >= -1e-12);
    Ok(IndifferenceReport {
        gaps: [d12, d13],
        lhs,
        equalities,
        inequalities,
        max_residual,
        inequalities_hold,
    })
}

/// The optimal two-expert finite-horizon policy implied by a solved table.
pub struct Policy2Table<'a> {
    table: &'a ValueTable,
    steps: u32,
}

/// Reads p2(d, ℓ) = V(d − 1, ℓ − 1) − V(d, ℓ) for d > 0 and 1/2 at a tie.
pub fn extract_policy2_finite(table: &ValueTable) -> Result<Policy2Table<'_>> {
    match table.horizon {
        HorizonSpec::Finite { steps } if table.k == 2 => Ok(Policy2Table { table, steps }),
        _ => Err(Error::InvalidInput(
            "policy extraction needs a finite-horizon table for k=2".into(),
        )),
    }
}

impl Policy2Table<'_> {
    /// (p1, p2) with `remaining` rounds left, or `None` outside 1..=T.
    pub fn get(&self, d: u32, remaining: u32) -> Option<(BigRational, BigRational)> {
        if remaining == 0 || remaining > self.steps {
            return None;
        }
        let p2 = if d == 0 {
            BigRational::new(1.into(), 2.into())
        } else {
            let v = |d: u32, l: u32| self.table.value(&[d], Some(l)).and_then(Value::exact).cloned();
            v(d - 1, remaining - 1)? - v(d, remaining)?
        };
        Some((BigRational::one() - &p2, p2))
    }
}
