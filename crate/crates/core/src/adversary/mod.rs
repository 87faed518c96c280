//! Balanced distributions, the balanced-polytope vertices and the concrete
//! adversaries built on them.

pub mod distribution;
pub mod policies;
pub mod vertices;

pub use distribution::{
    gains_for, is_balanced, sample_action, ActionDistribution, BalancedDistribution, VertexRecord,
};
pub use policies::{
    comb_adversary, comb_adversary_with, cover_adversary, last_step3_adversary, one_hot_adversary,
    optimal3_adversary, Adversary, Comb, Cover, LastStep3, OneHot, Optimal3, TieBreak,
};
pub use vertices::{enumerate_vertices, is_extreme, solve_support, vertex_index, vertices_json};
