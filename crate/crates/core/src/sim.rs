//! Monte Carlo game runner and leader-frequency estimator.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};
use serde::Serialize;

use crate::adversary::{comb_adversary, Adversary};
use crate::algorithm::{uniform_policy, Algorithm};
use crate::error::{Error, Result};
use crate::state::{HorizonContext, HorizonSpec, RankedState};
use crate::stats::run_trials;

/// How the player's gain is booked each round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Accounting {
    /// Add Σ p_i g_i, the expected gain over the player's own randomness.
    #[default]
    Expected,
    /// Draw the followed expert and add its realized gain.
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimConfig {
    pub k: usize,
    pub adversary: String,
    pub algorithm: String,
    pub horizon: HorizonSpec,
    pub accounting: Accounting,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegretEstimate {
    pub config: SimConfig,
    pub mean: f64,
    pub std_error: f64,
    pub trials: u64,
    pub seed: u64,
}

impl RegretEstimate {
    pub fn horizon(&self) -> HorizonSpec {
        self.config.horizon
    }

    pub fn sample_variance(&self) -> f64 {
        self.std_error * self.std_error * self.trials as f64
    }
}

fn check_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be at least 1".into()));
    }
    Ok(())
}

fn draw_length(horizon: HorizonSpec, rng: &mut ChaCha8Rng) -> u64 {
    match horizon {
        HorizonSpec::Finite { steps } => steps as u64,
        HorizonSpec::Geometric { delta } => Geometric::new(delta).expect("validated delta").sample(rng),
    }
}

fn context(horizon: HorizonSpec, length: u64, t: u64) -> HorizonContext {
    match horizon {
        HorizonSpec::Finite { .. } => HorizonContext::Remaining((length - t) as u32),
        HorizonSpec::Geometric { delta } => HorizonContext::Geometric(delta),
    }
}

pub fn run_game(
    adversary: &dyn Adversary,
    algorithm: &dyn Algorithm,
    horizon: HorizonSpec,
    trials: u64,
    seed: u64,
) -> Result<RegretEstimate> {
    run_game_with(adversary, algorithm, horizon, trials, seed, Accounting::Expected)
}

pub fn run_game_with(
    adversary: &dyn Adversary,
    algorithm: &dyn Algorithm,
    horizon: HorizonSpec,
    trials: u64,
    seed: u64,
    accounting: Accounting,
) -> Result<RegretEstimate> {
    check_trials(trials)?;
    horizon.validate()?;
    let k = adversary.k();
    if !algorithm.supports(k) {
        return Err(Error::Config(format!(
            "algorithm {} is not defined for k={k} (adversary {})",
            algorithm.name(),
            adversary.name()
        )));
    }
    let moments = run_trials(trials, seed, 1, |_, rng, out| {
        out[0] = play_once(adversary, algorithm, horizon, accounting, rng);
    });
    Ok(RegretEstimate {
        config: SimConfig {
            k,
            adversary: adversary.name(),
            algorithm: algorithm.name(),
            horizon,
            accounting,
        },
        mean: moments.mean(0),
        std_error: moments.std_error(0),
        trials,
        seed,
    })
}

/// One game from the origin; returns max final gain minus the player's gain.
fn play_once(
    adversary: &dyn Adversary,
    algorithm: &dyn Algorithm,
    horizon: HorizonSpec,
    accounting: Accounting,
    rng: &mut ChaCha8Rng,
) -> f64 {
    let k = adversary.k();
    let length = draw_length(horizon, rng);
    let mut state = RankedState::origin(k);
    let mut p = vec![0.0; k];
    let mut top = 0u64;
    let mut player = 0.0;
    for t in 0..length {
        let ctx = context(horizon, length, t);
        let dist = adversary.distribution(&state, ctx);
        algorithm.fill(&state, ctx, &mut p);
        let set = dist.sample_subset(rng);
        match accounting {
            Accounting::Expected => player += set.iter().map(|r| p[r]).sum::<f64>(),
            Accounting::Sampled => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut chosen = k - 1;
                for (r, &pr) in p.iter().enumerate() {
                    acc += pr;
                    if u < acc {
                        chosen = r;
                        break;
                    }
                }
                player += set.contains(chosen) as u8 as f64;
            }
        }
        top += state.advance(set) as u64;
    }
    top as f64 - player
}

/// Frequencies with which each starting rank finishes as leader.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeaderEstimate {
    /// Indexed by rank in the starting state.
    pub probs: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
}

/// Plays `adversary` from `start` to the end of `horizon` (for a finite
/// horizon, `steps` counts the rounds still to go) and credits the final leader.
///
/// Geometric horizon: tied leaders share the credit equally. Finite horizon:
/// an expert that was a (weak) leader both after the last round and before it
/// takes everything if it is the only such expert; otherwise tied leaders share.
pub fn leader_finish_probs(
    adversary: &dyn Adversary,
    start: &RankedState,
    horizon: HorizonSpec,
    trials: u64,
    seed: u64,
) -> Result<LeaderEstimate> {
    check_trials(trials)?;
    horizon.validate()?;
    let k = start.k();
    if adversary.k() != k {
        return Err(Error::Config(format!(
            "adversary {} is for k={}, start state has k={k}",
            adversary.name(),
            adversary.k()
        )));
    }
    // identity -> starting rank
    let mut rank_of = vec![0; k];
    for (r, &id) in start.perm().iter().enumerate() {
        rank_of[id] = r;
    }
    let m = run_trials(trials, seed, k, |_, rng, out| {
        let length = draw_length(horizon, rng);
        let mut state = start.clone();
        let mut prev = state.clone();
        for t in 0..length {
            let ctx = context(horizon, length, t);
            let set = adversary.distribution(&state, ctx).sample_subset(rng);
            if t + 1 == length {
                prev = state.clone();
            }
            state.advance(set);
        }
        let leaders = state.leaders();
        if let HorizonSpec::Finite { .. } = horizon {
            let prev_leaders = &prev.perm()[..prev.leaders()];
            let mut both = state.perm()[..leaders]
                .iter()
                .filter(|id| prev_leaders.contains(id));
            if let (Some(&id), None) = (both.next(), both.next()) {
                out[rank_of[id]] = 1.0;
                return;
            }
        }
        for &id in &state.perm()[..leaders] {
            out[rank_of[id]] = 1.0 / leaders as f64;
        }
    });
    Ok(LeaderEstimate {
        probs: (0..k).map(|i| m.mean(i)).collect(),
        std_errors: (0..k).map(|i| m.std_error(i)).collect(),
        trials,
        seed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CombPoint {
    pub delta: f64,
    pub estimate: RegretEstimate,
    /// estimate · √(2δ)
    pub normalized: f64,
    pub normalized_std_error: f64,
}

/// Regret of the comb adversary against the uniform player for each δ.
pub fn comb_regret_curve(k: usize, deltas: &[f64], trials: u64, seed: u64) -> Result<Vec<CombPoint>> {
    let comb = comb_adversary(k)?;
    let horizons: Vec<HorizonSpec> = deltas
        .iter()
        .map(|&d| HorizonSpec::geometric(d))
        .collect::<Result<_>>()?;
    check_trials(trials)?;
    horizons
        .into_iter()
        .map(|h| {
            let HorizonSpec::Geometric { delta } = h else {
                unreachable!()
            };
            let estimate = run_game(&comb, &uniform_policy(), h, trials, seed)?;
            let scale = (2.0 * delta).sqrt();
            Ok(CombPoint {
                delta,
                normalized: estimate.mean * scale,
                normalized_std_error: estimate.std_error * scale,
                estimate,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::{cover_adversary, optimal3_adversary};
    use crate::algorithm::opt2;

    #[test]
    fn zero_length_game_has_no_regret() {
        let e = run_game(&cover_adversary(), &opt2(), HorizonSpec::finite(0), 10, 1).unwrap();
        assert_eq!(e.mean, 0.0);
    }

    #[test]
    fn single_round_cover() {
        // max rises by one every round, player earns 1/2
        let e = run_game(
            &cover_adversary(),
            &uniform_policy(),
            HorizonSpec::finite(1),
            100,
            1,
        )
        .unwrap();
        assert_eq!(e.mean, 0.5);
        assert_eq!(e.std_error, 0.0);
    }

    #[test]
    fn mismatched_k_is_config_error() {
        let r = run_game(&optimal3_adversary(), &opt2(), HorizonSpec::finite(3), 10, 1);
        assert!(matches!(r, Err(Error::Config(_))));
        let r = leader_finish_probs(
            &cover_adversary(),
            &RankedState::origin(3),
            HorizonSpec::finite(3),
            10,
            1,
        );
        assert!(matches!(r, Err(Error::Config(_))));
    }

    #[test]
    fn zero_trials_rejected() {
        let r = run_game(&cover_adversary(), &opt2(), HorizonSpec::finite(3), 0, 1);
        assert!(matches!(r, Err(Error::InvalidInput(_))));
    }

    #[test]
    fn seeded_runs_repeat() {
        let h = HorizonSpec::geometric(0.2).unwrap();
        let a = run_game(&optimal3_adversary(), &uniform_policy(), h, 5000, 42).unwrap();
        let b = run_game(&optimal3_adversary(), &uniform_policy(), h, 5000, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn finite_tie_rule_last_round() {
        let s = RankedState::from_gaps(&[1]).unwrap();
        let e = leader_finish_probs(&cover_adversary(), &s, HorizonSpec::finite(1), 1000, 3).unwrap();
        assert_eq!(e.probs, vec![1.0, 0.0]);
    }

    #[test]
    fn finite_tie_rule_matches_exact_three_rounds() {
        // exact value 1/4 for the trailer, see the opt2 finite policy
        let s = RankedState::from_gaps(&[1]).unwrap();
        let e = leader_finish_probs(&cover_adversary(), &s, HorizonSpec::finite(3), 40_000, 3).unwrap();
        assert!((e.probs[1] - 0.25).abs() < 4.0 * e.std_errors[1]);
    }

    #[test]
    fn comb_curve_rejects_bad_delta() {
        assert!(comb_regret_curve(3, &[0.1, 1.5], 10, 1).is_err());
        assert!(comb_regret_curve(1, &[0.1], 10, 1).is_err());
    }
}
