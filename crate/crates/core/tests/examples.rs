//! Every example under `examples/` runs and produces what it prints.

macro_rules! example {
    ($name:ident) => {
        #[allow(dead_code)]
        mod $name {
            include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/", stringify!($name), ".rs"));
        }
    };
}

example!(incrementation);
example!(ping);
example!(random_messaging);
example!(htn_planning);
example!(deliberation_cycle);
example!(worker_pool);
example!(state_codec);
example!(directory_spawn);
example!(bench_sweep);
example!(water_pricing);
example!(river_config);
example!(river_basin);

#[test]
fn incrementation_counts_to_ten() {
    assert_eq!(incrementation::run().unwrap(), [10, 10, 10]);
}

#[test]
fn ping_leaves_at_most_one() {
    assert!(ping::run().unwrap() <= 1);
}

#[test]
fn random_messaging_conserves() {
    assert_eq!(random_messaging::run(20).unwrap(), 0);
}

#[test]
fn htn_planning_backtracks_and_merges() {
    assert_eq!(htn_planning::run().unwrap(), ["buy_tea", "boil", "Brew and pour"]);
}

#[test]
fn deliberation_phases_in_order() {
    let calls = deliberation_cycle::run().unwrap();
    let order = ["perceive", "goal_check", "reason", "execute", "role_check"];
    for step in 1..=3 {
        let phases: Vec<_> = calls
            .iter()
            .filter(|(s, p)| *s == step && *p != "process")
            .map(|(_, p)| *p)
            .collect();
        assert!(phases.chunks(5).all(|c| c == order), "step {step}: {phases:?}");
    }
}

#[test]
fn worker_pool_contains_panics() {
    let (ok, _) = worker_pool::run().unwrap();
    assert_eq!(ok, [0, 1, 4, 9, 16, 36, 49]);
}

#[test]
fn state_codec_round_trips() {
    let s = state_codec::run().unwrap();
    assert!(s.planner.is_some());
}

#[test]
fn directory_spawn_finds_helpers() {
    assert_eq!(directory_spawn::run().unwrap(), 2);
}

#[test]
fn bench_sweep_fits_a_line() {
    let fit = bench_sweep::run(&[4, 8]).unwrap();
    assert!(fit.slope > 0.0);
}

#[test]
fn water_pricing_runs() {
    // 2 m3 at (422, 450, 986, 59, 22) g/m3 priced at 50/75/75/120/150 EUR/kg
    let want = 2.0 * (0.422 * 50.0 + 0.450 * 75.0 + 0.986 * 75.0 + 0.059 * 120.0 + 0.022 * 150.0);
    assert!((water_pricing::run().unwrap() - want).abs() < 1e-9);
}

#[test]
fn river_config_with_towns() {
    let s = river_config::run(None).unwrap();
    assert_eq!(s.storage.len(), 12);
}

#[test]
fn river_basin_first_discharge() {
    let s = river_basin::run(10, None).unwrap();
    assert_eq!(goalsim::scenarios::river::first_positive_step(&s.discharge), Some(3));
}
