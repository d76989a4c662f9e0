mod common;

use common::oracle::{check, merge, oracle_plan, replay, Case};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn planner_matches_brute_force(seed in any::<u64>()) {
        prop_assert_eq!(check(seed), Ok(()));
    }

    #[test]
    fn effect_replay_reproduces_simulated_beliefs(seed in any::<u64>()) {
        prop_assert_eq!(replay(seed), Ok(()));
    }
}

#[test]
fn corpus_has_solvable_and_unsolvable_networks() {
    let solved = (0..200u64).filter(|s| oracle_plan(&Case::random(*s)).is_some()).count();
    assert!(solved > 40 && solved < 200, "solved {solved}");
    let merged = (0..200u64)
        .filter_map(|s| {
            let c = Case::random(s);
            oracle_plan(&c).map(|(steps, _)| merge(&c, &steps))
        })
        .any(|blocks| blocks.iter().any(|b| b.actions.len() > 2));
    assert!(merged);
}
