use goalsim::agent::State;
use goalsim::beliefs::{BeliefSet, BeliefValue};
use goalsim::registry::EffectTable;
use goalsim::scenarios::river::WaterMass;
use proptest::prelude::*;

use super::oracle::Case;

fn real() -> impl Strategy<Value = f64> {
    prop_oneof![
        8 => -1e12..1e12f64,
        1 => Just(0.0),
        1 => Just(f64::INFINITY),
        1 => Just(f64::MIN_POSITIVE),
        1 => any::<f64>().prop_filter("finite", |x| x.is_finite()),
    ]
}

pub fn belief_value() -> impl Strategy<Value = BeliefValue> {
    let leaf = prop_oneof![
        any::<bool>().prop_map(BeliefValue::Bool),
        any::<i64>().prop_map(BeliefValue::Int),
        real().prop_map(BeliefValue::Real),
        "\\PC{0,12}".prop_map(BeliefValue::Text),
    ];
    leaf.prop_recursive(3, 24, 4, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 0..4).prop_map(BeliefValue::List),
            prop::collection::btree_map("[a-z]{1,4}", inner, 0..4)
                .prop_map(|m| BeliefValue::Map(m.into_iter().fold(BeliefSet::new(), |s, (k, v)| s.with(k, v)))),
        ]
    })
}

pub fn belief_set() -> impl Strategy<Value = BeliefSet> {
    prop::collection::btree_map("[a-z_]{1,8}", belief_value(), 0..6)
        .prop_map(|m| m.into_iter().fold(BeliefSet::new(), |s, (k, v)| s.with(k, v)))
}

/// States with and without a planner; planners come from random networks,
/// sometimes mid-plan.
pub fn state() -> impl Strategy<Value = State> {
    (belief_set(), prop::option::of((any::<u64>(), any::<bool>(), 0usize..3))).prop_map(|(beliefs, p)| {
        let planner = p.map(|(seed, plan, advance)| {
            let case = Case::random(seed);
            let mut planner = case.planner();
            if plan {
                planner.replan(&case.belief_set(), &EffectTable::default());
                for _ in 0..advance {
                    planner.next_block();
                }
            }
            planner
        });
        State::new(beliefs, planner)
    })
}

pub fn water_mass() -> impl Strategy<Value = WaterMass> {
    (0.0..500.0f64, prop::array::uniform5(0.0..2000.0f64)).prop_map(|(v, c)| WaterMass::new(v, c))
}
