//! Exact minimax values: finite-horizon backward induction, truncated value
//! iteration for the geometric horizon, closed forms and residual checks.

pub mod checks;
pub mod closed;
pub mod export;
pub mod finite;
pub mod geometric;

use std::collections::HashMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::ToPrimitive;

use crate::adversary::BalancedDistribution;
use crate::state::HorizonSpec;

pub use checks::{
    check_indifference3, check_recurrences, extract_policy2_finite, line_values3, IndifferenceReport,
    Policy2Table, ResidualReport,
};
pub use closed::{finite_regret_closed2, geometric_regret_closed};
pub use export::{table_csv, table_json, write_table, TableFormat};
pub use finite::{solve_finite, solve_finite_with_cap, DEFAULT_STATE_CAP};
pub use geometric::{solve_geometric, solve_geometric_with, GeometricOptions};

/// A table value: exact for the finite horizon, floating point for the geometric one.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Exact(BigRational),
    Float(f64),
}

impl Value {
    pub fn to_f64(&self) -> f64 {
        match self {
            Value::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            Value::Float(v) => *v,
        }
    }

    pub fn exact(&self) -> Option<&BigRational> {
        match self {
            Value::Exact(r) => Some(r),
            Value::Float(_) => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Exact(r) if r.is_integer() => write!(f, "{}", r.numer()),
            Value::Exact(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Value::Float(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableEntry {
    pub gaps: Vec<u32>,
    /// Rounds left; `None` for the geometric horizon.
    pub remaining: Option<u32>,
    pub value: Value,
    /// Indices into [`ValueTable::vertices`] of the maximizing adversary moves.
    pub best_actions: Vec<usize>,
}

type Key = (Vec<u32>, Option<u32>);

/// Solved values over ranked states.
///
/// Finite tables hold, for each number of remaining rounds ℓ, every sorted gap
/// vector with entries at most ℓ; larger gaps behave exactly like ℓ, since
/// such an expert cannot catch up before the game ends, and lookups clamp.
/// Geometric tables hold every sorted gap vector up to the gap cap.
#[derive(Debug, Clone)]
pub struct ValueTable {
    pub k: usize,
    pub horizon: HorizonSpec,
    pub vertices: Vec<BalancedDistribution>,
    pub entries: Vec<TableEntry>,
    index: HashMap<Key, usize>,
    pub gap_cap: Option<u32>,
    pub truncation_bound: Option<f64>,
    pub iterations: Option<u64>,
}

impl ValueTable {
    pub(crate) fn new(
        k: usize,
        horizon: HorizonSpec,
        vertices: Vec<BalancedDistribution>,
        entries: Vec<TableEntry>,
    ) -> Self {
        let index = entries
            .iter()
            .enumerate()
            .map(|(i, e)| ((e.gaps.clone(), e.remaining), i))
            .collect();
        ValueTable {
            k,
            horizon,
            vertices,
            entries,
            index,
            gap_cap: None,
            truncation_bound: None,
            iterations: None,
        }
    }

    pub fn entry(&self, gaps: &[u32], remaining: Option<u32>) -> Option<&TableEntry> {
        let key = match (self.horizon, remaining) {
            (HorizonSpec::Finite { steps }, Some(l)) if l <= steps => {
                (gaps.iter().map(|&g| g.min(l)).collect(), Some(l))
            }
            (HorizonSpec::Geometric { .. }, None) => (gaps.to_vec(), None),
            _ => return None,
        };
        self.index.get(&key).map(|&i| &self.entries[i])
    }

    pub fn value(&self, gaps: &[u32], remaining: Option<u32>) -> Option<&Value> {
        self.entry(gaps, remaining).map(|e| &e.value)
    }

    /// Entry of the all-tied state at the start of the game.
    pub fn origin(&self) -> &TableEntry {
        let gaps = vec![0; self.k - 1];
        let remaining = match self.horizon {
            HorizonSpec::Finite { steps } => Some(steps),
            HorizonSpec::Geometric { .. } => None,
        };
        self.entry(&gaps, remaining).expect("origin is always tabulated")
    }

    pub fn minimax_regret(&self) -> &Value {
        &self.origin().value
    }

    /// `{1}{23}`-style labels of the best moves at an entry.
    pub fn best_labels(&self, entry: &TableEntry) -> Vec<String> {
        entry
            .best_actions
            .iter()
            .map(|&i| self.vertices[i].label())
            .collect()
    }
}

/// All nondecreasing vectors of length `len` with entries in `0..=cap`, in
/// lexicographic order.
pub(crate) fn sorted_gap_vectors(len: usize, cap: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(len);
    fn rec(len: usize, lo: u32, cap: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for g in lo..=cap {
            cur.push(g);
            rec(len, g, cap, cur, out);
            cur.pop();
        }
    }
    rec(len, 0, cap, &mut cur, &mut out);
    out
}

/// Number of sorted gap vectors of length `len` with entries at most `cap`: C(cap+len, len).
pub(crate) fn count_gap_vectors(len: usize, cap: u32) -> u128 {
    let mut c: u128 = 1;
    for i in 1..=len as u128 {
        c = c * (cap as u128 + i) / i;
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gap_vector_counts() {
        for len in 0..4 {
            for cap in 0..6 {
                let v = sorted_gap_vectors(len, cap);
                assert_eq!(v.len() as u128, count_gap_vectors(len, cap));
                assert!(v.iter().all(|g| g.windows(2).all(|w| w[0] <= w[1])));
            }
        }
    }
}
