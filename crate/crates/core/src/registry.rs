//! Policies addressable by name, e.g. `comb:ties=reverse`, `mwa:eta=0.3`,
//! `pmatch:comb:trials=10000`.

use std::sync::Arc;

use crate::adversary::{
    comb_adversary_with, cover_adversary, one_hot_adversary, optimal3_adversary, Adversary, LastStep3,
    TieBreak,
};
use crate::algorithm::{mwa, opt2, opt3, probability_matching, uniform_policy, Algorithm};
use crate::error::{Error, Result};

pub const ADVERSARY_NAMES: &[&str] = &[
    "cover",
    "optimal3",
    "comb",
    "comb:ties=reverse",
    "onehot",
    "last-step3",
];

pub const ALGORITHM_NAMES: &[&str] = &[
    "uniform",
    "mwa:eta=<float>",
    "opt2",
    "opt3",
    "pmatch:<adversary>[:trials=<n>][:seed=<n>]",
];

const DEFAULT_PMATCH_TRIALS: u64 = 10_000;

fn need_k(name: &str, want: usize, k: usize) -> Result<()> {
    if want == k {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "adversary {name} is defined for k={want}, got k={k}"
        )))
    }
}

pub fn adversary_by_name(name: &str, k: usize) -> Result<Arc<dyn Adversary>> {
    Ok(match name {
        "cover" => {
            need_k(name, 2, k)?;
            Arc::new(cover_adversary())
        }
        "optimal3" => {
            need_k(name, 3, k)?;
            Arc::new(optimal3_adversary())
        }
        "last-step3" => {
            need_k(name, 3, k)?;
            Arc::new(LastStep3)
        }
        "comb" => Arc::new(comb_adversary_with(k, TieBreak::Stable)?),
        "comb:ties=reverse" => Arc::new(comb_adversary_with(k, TieBreak::ReverseTies)?),
        "onehot" => Arc::new(one_hot_adversary(k)?),
        _ => {
            return Err(Error::Config(format!(
                "unknown adversary {name:?}; known: {}",
                ADVERSARY_NAMES.join(", ")
            )))
        }
    })
}

fn parse_param<T: std::str::FromStr>(part: &str, key: &str) -> Option<Result<T>> {
    let value = part.strip_prefix(key)?.strip_prefix('=')?;
    Some(
        value
            .parse()
            .map_err(|_| Error::Config(format!("bad value {value:?} for {key}"))),
    )
}

pub fn algorithm_by_name(name: &str, k: usize, seed: u64) -> Result<Arc<dyn Algorithm>> {
    let alg: Arc<dyn Algorithm> = if let Some(rest) = name.strip_prefix("pmatch:") {
        let mut adversary = Vec::new();
        let mut trials = DEFAULT_PMATCH_TRIALS;
        let mut pm_seed = seed;
        for part in rest.split(':') {
            if let Some(t) = parse_param(part, "trials") {
                trials = t?;
            } else if let Some(s) = parse_param(part, "seed") {
                pm_seed = s?;
            } else {
                adversary.push(part);
            }
        }
        let adv = adversary_by_name(&adversary.join(":"), k)?;
        Arc::new(probability_matching(adv, trials, pm_seed)?)
    } else if let Some(rest) = name.strip_prefix("mwa:") {
        let eta = parse_param(rest, "eta")
            .ok_or_else(|| Error::Config(format!("expected mwa:eta=<float>, got {name:?}")))??;
        Arc::new(mwa(eta)?)
    } else {
        match name {
            "uniform" => Arc::new(uniform_policy()),
            "opt2" => Arc::new(opt2()),
            "opt3" => Arc::new(opt3()),
            _ => {
                return Err(Error::Config(format!(
                    "unknown algorithm {name:?}; known: {}",
                    ALGORITHM_NAMES.join(", ")
                )))
            }
        }
    };
    if !alg.supports(k) {
        return Err(Error::Config(format!(
            "algorithm {name} is not defined for k={k}"
        )));
    }
    Ok(alg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_names_resolve() {
        assert_eq!(adversary_by_name("cover", 2).unwrap().name(), "cover");
        assert_eq!(
            adversary_by_name("comb:ties=reverse", 4).unwrap().name(),
            "comb:ties=reverse"
        );
        assert_eq!(
            algorithm_by_name("mwa:eta=0.3", 3, 0).unwrap().name(),
            "mwa:eta=0.3"
        );
        assert_eq!(
            algorithm_by_name("pmatch:comb:trials=500", 3, 0).unwrap().name(),
            "pmatch:comb:trials=500"
        );
        assert_eq!(
            algorithm_by_name("pmatch:comb:ties=reverse", 3, 0)
                .unwrap()
                .name(),
            "pmatch:comb:ties=reverse:trials=10000"
        );
    }

    #[test]
    fn bad_names_and_k() {
        assert!(matches!(adversary_by_name("cover", 3), Err(Error::Config(_))));
        assert!(matches!(adversary_by_name("zigzag", 3), Err(Error::Config(_))));
        assert!(matches!(algorithm_by_name("opt3", 2, 0), Err(Error::Config(_))));
        assert!(matches!(
            algorithm_by_name("mwa:eta=abc", 2, 0),
            Err(Error::Config(_))
        ));
        assert!(matches!(algorithm_by_name("mwa", 2, 0), Err(Error::Config(_))));
        assert!(algorithm_by_name("pmatch:cover:trials=0", 2, 0).is_err());
    }
}
