//! Minimax regret for prediction with expert advice against balanced,
//! oblivious adversaries: exact dynamic-programming solvers, closed forms,
//! random-walk oracles and a seeded Monte Carlo engine.

pub mod adversary;
pub mod algorithm;
pub mod error;
pub mod registry;
pub mod roots;
pub mod sim;
pub mod solver;
pub mod state;
pub mod stats;
pub mod walk;

pub use error::{Error, Result};
pub use roots::{characteristic_roots, RootPair};
pub use state::{
    apply_ranked_gain, max_rise, rank_state, GainVector, HorizonContext, HorizonSpec, RankSet, RankedState,
};
