use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use proptest::prelude::*;

use minimax_experts::adversary::{enumerate_vertices, gains_for};
use minimax_experts::algorithm::{
    opt2_finite_policy, opt2_geometric_policy, opt3_geometric_policy, PolicyVector,
};
use minimax_experts::solver::{solve_finite, Value, ValueTable};
use minimax_experts::walk::{expected_abs_srw, reach_prob_before_kill};
use minimax_experts::{apply_ranked_gain, rank_state, RankSet};

fn delta() -> impl Strategy<Value = f64> {
    0.001f64..0.999
}

proptest! {
    #[test]
    fn normalized_vectors_are_policies(raw in prop::collection::vec(0.0f64..10.0, 1..8)) {
        let total: f64 = raw.iter().sum();
        prop_assume!(total > 1e-6);
        let p: Vec<f64> = raw.iter().map(|x| x / total).collect();
        let pv = PolicyVector::new(p).unwrap();
        prop_assert!((pv.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn negative_or_unnormalized_vectors_rejected(a in -1.0f64..-1e-6, b in 0.0f64..1.0) {
        prop_assert!(PolicyVector::new(vec![a, 1.0 - a]).is_err());
        prop_assert!(PolicyVector::new(vec![b, b + 0.5]).is_err());
    }

    #[test]
    fn closed_form_policies_are_distributions(d12 in 0u32..60, extra in 0u32..60, dl in delta(), l in 1u32..40) {
        for p in [
            opt2_geometric_policy(d12, dl).unwrap(),
            opt2_finite_policy(d12, l).unwrap(),
            opt3_geometric_policy(d12, d12 + extra, dl).unwrap(),
        ] {
            prop_assert!(p.as_slice().iter().all(|&x| (0.0..=1.0).contains(&x)));
            prop_assert!((p.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-12);
            // the leader is never followed less than a trailing expert
            prop_assert!(p.as_slice().windows(2).all(|w| w[0] >= w[1] - 1e-15));
        }
    }

    #[test]
    fn reach_probability_is_multiplicative(a in 0u32..40, b in 0u32..40, dl in delta()) {
        let whole = reach_prob_before_kill(a + b, dl).unwrap();
        let split = reach_prob_before_kill(a, dl).unwrap() * reach_prob_before_kill(b, dl).unwrap();
        prop_assert!((whole - split).abs() <= 1e-12 * whole.max(1e-300) + 1e-300);
    }

    #[test]
    fn srw_one_step_recursion(x in -30i64..30, l in 1u32..60) {
        let e = |x: i64, l: u32| expected_abs_srw(x, l).exact().cloned().unwrap();
        let rhs = (e(x - 1, l - 1) + e(x + 1, l - 1)) / BigRational::from_integer(BigInt::from(2));
        prop_assert_eq!(e(x, l), rhs);
    }

    #[test]
    fn srw_mean_is_symmetric_and_dominates_start(x in -30i64..30, l in 0u32..60) {
        let e = expected_abs_srw(x, l).exact().cloned().unwrap();
        let mirrored = expected_abs_srw(-x, l);
        prop_assert_eq!(Some(&e), mirrored.exact());
        prop_assert!(e >= BigRational::from_integer(BigInt::from(x.abs())));
    }

    #[test]
    fn ranked_update_matches_identity_update(
        gains in prop::collection::vec(0i64..12, 2..7),
        mask in any::<u32>(),
    ) {
        let k = gains.len();
        let state = rank_state(&gains).unwrap();
        let set = RankSet(mask & RankSet::full(k).0);
        let (next, inc) = apply_ranked_gain(&state, set);

        // oracle: move the raw gains by identity and re-rank
        let moved = gains_for(set, &state);
        let raw: Vec<i64> = state
            .to_gains()
            .iter()
            .zip(moved.as_slice())
            .map(|(g, &m)| g + m as i64)
            .collect();
        let want = rank_state(&raw).unwrap();
        prop_assert_eq!(next.gaps(), want.gaps());
        prop_assert_eq!(next.perm(), want.perm());

        let max_before = *state.to_gains().iter().max().unwrap();
        let max_after = *raw.iter().max().unwrap();
        let want_inc = Rational64::new((max_after - max_before) * k as i64 - set.len() as i64, k as i64);
        prop_assert_eq!(inc, want_inc);
    }

    #[test]
    fn vertices_are_balanced_at_any_state(k in 2usize..=4, which in any::<prop::sample::Index>(), gains in prop::collection::vec(0i64..5, 4)) {
        let vs = enumerate_vertices(k).unwrap();
        let v = &vs[which.index(vs.len())];
        let state = rank_state(&gains[..k]).unwrap();
        // expected gain of each identity under the vertex mapped through the state's ranking
        let mut per_id = vec![Rational64::from_integer(0); k];
        for &(set, p) in v.support() {
            for (id, &g) in gains_for(set, &state).as_slice().iter().enumerate() {
                per_id[id] += p * Rational64::from_integer(g as i64);
            }
        }
        prop_assert!(per_id.iter().all(|x| *x == per_id[0]));
    }
}

fn exact(table: &ValueTable, gaps: &[u32], l: u32) -> BigRational {
    table
        .value(gaps, Some(l))
        .and_then(Value::exact)
        .cloned()
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn finite_value_monotone(d12 in 0u32..9, extra in 0u32..9, l in 0u32..9) {
        // solving is cheap at this size; the table is rebuilt per case
        let table = solve_finite(3, 9).unwrap();
        let d13 = d12 + extra;
        let v = exact(&table, &[d12, d13], l);
        // more rounds never lower the value
        if l < 9 {
            prop_assert!(exact(&table, &[d12, d13], l + 1) >= v);
        }
        // a trailing expert falling further behind never raises it
        prop_assert!(exact(&table, &[d12, d13 + 1], l) <= v);
        if d12 < d13 {
            prop_assert!(exact(&table, &[d12 + 1, d13], l) <= v);
        }
    }
}
