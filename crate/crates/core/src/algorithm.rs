//! Player-side policies. Every policy is written over ranks (index 0 is the
//! current leader) and mapped back to expert identities through
//! [`RankedState::perm`] when needed.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, RwLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;

use crate::adversary::Adversary;
use crate::error::{Error, Result};
use crate::roots::characteristic_roots;
use crate::sim::leader_finish_probs;
use crate::state::{check_delta, HorizonContext, HorizonSpec, RankedState};
use crate::walk::binomial_row;

/// Follow probabilities, one per expert.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyVector(Vec<f64>);

impl PolicyVector {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidInput("empty policy vector".into()));
        }
        if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::InvalidInput(format!("probability {p} outside [0, 1]")));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!("probabilities sum to {sum}")));
        }
        Ok(PolicyVector(probs))
    }

    pub fn uniform(k: usize) -> Self {
        PolicyVector(vec![1.0 / k as f64; k])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn k(&self) -> usize {
        self.0.len()
    }

    /// Reorders a rank-indexed vector into expert-identity order.
    pub fn to_identities(&self, state: &RankedState) -> PolicyVector {
        let mut out = vec![0.0; self.0.len()];
        for (rank, &id) in state.perm().iter().enumerate() {
            out[id] = self.0[rank];
        }
        PolicyVector(out)
    }
}

impl fmt::Display for PolicyVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|p| format!("{p:.7}")).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// An oblivious player: a rule from ranked state and horizon to follow probabilities.
pub trait Algorithm: Send + Sync {
    fn name(&self) -> String;

    fn supports(&self, k: usize) -> bool;

    /// Writes rank-indexed probabilities into `out` (length `state.k()`).
    fn fill(&self, state: &RankedState, ctx: HorizonContext, out: &mut [f64]);

    fn policy(&self, state: &RankedState, ctx: HorizonContext) -> PolicyVector {
        let mut out = vec![0.0; state.k()];
        self.fill(state, ctx, &mut out);
        PolicyVector(out)
    }
}

#[derive(Debug, Clone, Default)]
pub struct Uniform;

pub fn uniform_policy() -> Uniform {
    Uniform
}

impl Algorithm for Uniform {
    fn name(&self) -> String {
        "uniform".into()
    }
    fn supports(&self, k: usize) -> bool {
        k >= 1
    }
    fn fill(&self, state: &RankedState, _: HorizonContext, out: &mut [f64]) {
        out.fill(1.0 / state.k() as f64);
    }
}

/// Exponential weights exp(eta * G_i), normalized after subtracting the maximum.
pub fn mwa_policy(gains: &[i64], eta: f64) -> Result<PolicyVector> {
    if !eta.is_finite() {
        return Err(Error::InvalidInput(format!("eta must be finite, got {eta}")));
    }
    if gains.is_empty() {
        return Err(Error::InvalidInput("empty gain vector".into()));
    }
    let mut out = vec![0.0; gains.len()];
    mwa_fill(gains.iter().map(|&g| g as f64), eta, &mut out);
    Ok(PolicyVector(out))
}

fn mwa_fill(gains: impl Iterator<Item = f64> + Clone, eta: f64, out: &mut [f64]) {
    let top = gains.clone().map(|g| eta * g).fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for (o, g) in out.iter_mut().zip(gains) {
        *o = (eta * g - top).exp();
        total += *o;
    }
    out.iter_mut().for_each(|o| *o /= total);
}

#[derive(Debug, Clone)]
pub struct Mwa {
    pub eta: f64,
}

pub fn mwa(eta: f64) -> Result<Mwa> {
    if !eta.is_finite() || eta < 0.0 {
        return Err(Error::InvalidInput(format!(
            "eta must be finite and >= 0, got {eta}"
        )));
    }
    Ok(Mwa { eta })
}

impl Algorithm for Mwa {
    fn name(&self) -> String {
        format!("mwa:eta={}", self.eta)
    }
    fn supports(&self, k: usize) -> bool {
        k >= 1
    }
    fn fill(&self, state: &RankedState, _: HorizonContext, out: &mut [f64]) {
        let k = state.k();
        mwa_fill((0..k).map(|r| -(state.gap_of(r) as f64)), self.eta, out);
    }
}

/// Learning rate at which exponential weights reproduce the optimal
/// two-expert geometric policy at gap 1.
pub fn fit_mwa_eta(delta: f64) -> Result<f64> {
    let xi = characteristic_roots(delta)?.xi2;
    Ok((2.0 / xi - 1.0).ln())
}

/// Optimal two-expert policy for the geometric horizon: (1 − ξ^d/2, ξ^d/2).
pub fn opt2_geometric_policy(d: u32, delta: f64) -> Result<PolicyVector> {
    let lag = characteristic_roots(delta)?.decay(d) / 2.0;
    Ok(PolicyVector(vec![1.0 - lag, lag]))
}

/// Exact optimal two-expert policy with `remaining >= 1` rounds left.
///
/// The lagging expert is followed with probability P(S > d) + P(S = d)/2,
/// where S is a fair ±1 walk of `remaining - 1` steps: it must pull strictly
/// ahead before the last round, or draw level and win the final coin flip.
pub fn opt2_finite_exact(d: u32, remaining: u32) -> Result<(BigRational, BigRational)> {
    if remaining == 0 {
        return Err(Error::InvalidInput(
            "opt2 finite policy needs remaining >= 1".into(),
        ));
    }
    let row = binomial_row(remaining - 1);
    let lag = lagging_share(d, remaining - 1, &row);
    Ok((BigRational::one() - &lag, lag))
}

fn lagging_share(d: u32, m: u32, row: &[BigInt]) -> BigRational {
    if d == 0 {
        return BigRational::new(1.into(), 2.into());
    }
    // S = 2j - m over j successes
    let mut twice = BigInt::zero();
    for (j, c) in row.iter().enumerate() {
        let s = 2 * j as i64 - m as i64;
        if s > d as i64 {
            twice += c * 2;
        } else if s == d as i64 {
            twice += c;
        }
    }
    BigRational::new(twice, BigInt::one() << (m as usize + 1))
}

pub fn opt2_finite_policy(d: u32, remaining: u32) -> Result<PolicyVector> {
    let (p1, p2) = opt2_finite_exact(d, remaining)?;
    Ok(PolicyVector(vec![
        p1.to_f64().unwrap_or(1.0),
        p2.to_f64().unwrap_or(0.0),
    ]))
}

/// Optimal three-expert policy for the geometric horizon.
pub fn opt3_geometric_policy(d12: u32, d13: u32, delta: f64) -> Result<PolicyVector> {
    if d12 > d13 {
        return Err(Error::Domain(format!(
            "gaps must satisfy d12 <= d13, got ({d12}, {d13})"
        )));
    }
    let roots = characteristic_roots(delta)?;
    Ok(PolicyVector(opt3_probs(roots.xi2, d12, d13).to_vec()))
}

fn opt3_probs(xi: f64, d12: u32, d13: u32) -> [f64; 3] {
    let a = xi.powi(d12 as i32) / 2.0;
    let b = xi.powi((2 * d13 - d12) as i32) / 6.0;
    let p3 = 2.0 * b;
    // tied ranks must get bit-identical probabilities
    let p2 = if d12 == d13 { p3 } else { a - b };
    let p1 = if d12 == 0 { p2 } else { 1.0 - p2 - p3 };
    [p1, p2, p3]
}

/// Tabulated lagging-expert probabilities of the finite two-expert policy,
/// filled lazily one remaining-steps row at a time.
#[derive(Debug, Default)]
struct FiniteRows(RwLock<HashMap<u32, Arc<Vec<f64>>>>);

impl FiniteRows {
    fn lag(&self, d: u32, remaining: u32) -> f64 {
        if remaining == 0 {
            return if d == 0 { 0.5 } else { 0.0 };
        }
        if d >= remaining {
            return 0.0;
        }
        if let Some(row) = self.0.read().unwrap().get(&remaining) {
            return row[d as usize];
        }
        let m = remaining - 1;
        let bin = binomial_row(m);
        let row: Vec<f64> = (0..remaining)
            .map(|d| lagging_share(d, m, &bin).to_f64().unwrap_or(0.0))
            .collect();
        let p = row[d as usize];
        self.0.write().unwrap().insert(remaining, Arc::new(row));
        p
    }
}

/// Optimal two-expert player for either horizon.
#[derive(Debug, Default)]
pub struct Opt2 {
    rows: FiniteRows,
}

pub fn opt2() -> Opt2 {
    Opt2::default()
}

impl Algorithm for Opt2 {
    fn name(&self) -> String {
        "opt2".into()
    }
    fn supports(&self, k: usize) -> bool {
        k == 2
    }
    fn fill(&self, state: &RankedState, ctx: HorizonContext, out: &mut [f64]) {
        let d = state.gaps()[0];
        let lag = match ctx {
            HorizonContext::Geometric(delta) => {
                characteristic_roots(delta).expect("validated delta").decay(d) / 2.0
            }
            HorizonContext::Remaining(l) => self.rows.lag(d, l),
        };
        out[0] = 1.0 - lag;
        out[1] = lag;
    }
}

/// Optimal three-expert player for the geometric horizon.
#[derive(Debug, Clone, Default)]
pub struct Opt3;

pub fn opt3() -> Opt3 {
    Opt3
}

impl Algorithm for Opt3 {
    fn name(&self) -> String {
        "opt3".into()
    }
    fn supports(&self, k: usize) -> bool {
        k == 3
    }
    fn fill(&self, state: &RankedState, ctx: HorizonContext, out: &mut [f64]) {
        let HorizonContext::Geometric(delta) = ctx else {
            // no closed form for a finite horizon: fall back to uniform
            out.fill(1.0 / 3.0);
            return;
        };
        let xi = characteristic_roots(delta).expect("validated delta").xi2;
        out.copy_from_slice(&opt3_probs(xi, state.gaps()[0], state.gaps()[1]));
    }
}

/// Horizon still ahead of a player at `ctx`, as a game specification.
fn remaining_horizon(ctx: HorizonContext) -> HorizonSpec {
    match ctx {
        HorizonContext::Remaining(l) => HorizonSpec::Finite { steps: l },
        HorizonContext::Geometric(delta) => HorizonSpec::Geometric { delta },
    }
}

/// Follow each rank with the frequency it finishes as leader when `adversary`
/// plays out the rest of the game from `state`.
pub fn probability_matching_policy<R: Rng + ?Sized>(
    state: &RankedState,
    adversary: &dyn Adversary,
    horizon: HorizonContext,
    trials: u64,
    rng: &mut R,
) -> Result<PolicyVector> {
    if let HorizonContext::Geometric(delta) = horizon {
        check_delta(delta)?;
    }
    let start = RankedState::from_gaps(state.gaps())?;
    let est = leader_finish_probs(
        adversary,
        &start,
        remaining_horizon(horizon),
        trials,
        rng.random(),
    )?;
    Ok(PolicyVector(est.probs))
}

fn mix(mut h: u64, v: u64) -> u64 {
    // splitmix64 finalizer over a running combination
    h ^= v
        .wrapping_add(0x9e37_79b9_7f4a_7c15)
        .wrapping_add(h << 6)
        .wrapping_add(h >> 2);
    h = (h ^ (h >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    h = (h ^ (h >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    h ^ (h >> 31)
}

type PmKey = (Vec<u32>, u64, bool);

/// Probability matching against a named adversary. Closed forms are used
/// where one is known; otherwise rollouts seeded by the state itself, so the
/// policy is a deterministic function of (state, horizon).
pub struct ProbabilityMatching {
    adversary: Arc<dyn Adversary>,
    trials: u64,
    seed: u64,
    closed: Option<Box<dyn Algorithm>>,
    cache: Mutex<HashMap<PmKey, Arc<Vec<f64>>>>,
}

pub fn probability_matching(
    adversary: Arc<dyn Adversary>,
    trials: u64,
    seed: u64,
) -> Result<ProbabilityMatching> {
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be at least 1".into()));
    }
    let closed: Option<Box<dyn Algorithm>> = match adversary.name().as_str() {
        "cover" => Some(Box::new(opt2())),
        "comb" if adversary.k() == 2 => Some(Box::new(opt2())),
        "optimal3" => Some(Box::new(opt3())),
        _ => None,
    };
    Ok(ProbabilityMatching {
        adversary,
        trials,
        seed,
        closed,
        cache: Mutex::new(HashMap::new()),
    })
}

impl ProbabilityMatching {
    /// Forces Monte Carlo rollouts even where a closed form exists.
    pub fn without_closed_form(mut self) -> Self {
        self.closed = None;
        self
    }

    fn rollout(&self, state: &RankedState, ctx: HorizonContext) -> Arc<Vec<f64>> {
        let ctx_key = match ctx {
            HorizonContext::Remaining(l) => (l as u64, false),
            HorizonContext::Geometric(d) => (d.to_bits(), true),
        };
        let key: PmKey = (state.gaps().to_vec(), ctx_key.0, ctx_key.1);
        if let Some(p) = self.cache.lock().unwrap().get(&key) {
            return p.clone();
        }
        let seed = state
            .gaps()
            .iter()
            .fold(mix(self.seed, ctx_key.0), |h, &g| mix(h, g as u64));
        let start = RankedState::from_gaps(state.gaps()).expect("sorted gaps");
        let est = leader_finish_probs(
            self.adversary.as_ref(),
            &start,
            remaining_horizon(ctx),
            self.trials,
            seed,
        )
        .expect("validated configuration");
        let probs = Arc::new(est.probs);
        self.cache.lock().unwrap().insert(key, probs.clone());
        probs
    }
}

impl Algorithm for ProbabilityMatching {
    fn name(&self) -> String {
        format!("pmatch:{}:trials={}", self.adversary.name(), self.trials)
    }
    fn supports(&self, k: usize) -> bool {
        k == self.adversary.k()
    }
    fn fill(&self, state: &RankedState, ctx: HorizonContext, out: &mut [f64]) {
        if let Some(c) = &self.closed {
            let finite_opt3 = matches!(ctx, HorizonContext::Remaining(_)) && state.k() == 3;
            if !finite_opt3 {
                return c.fill(state, ctx, out);
            }
        }
        out.copy_from_slice(&self.rollout(state, ctx));
    }
}
