mod common;

use common::strategies::water_mass;
use goalsim::executor::ExecutorConfig;
use goalsim::scenarios::river::{
    self, mix, sewer_advance, treatment_price, Penalty, RiverConfig, RiverEnv, WaterMass, WwtpParams,
};
use proptest::prelude::*;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

fn same(a: &WaterMass, b: &WaterMass) -> bool {
    close(a.volume, b.volume, 1e-9) && a.conc.iter().zip(b.conc).all(|(x, y)| close(*x, y, 1e-9))
}

fn penalty() -> impl Strategy<Value = Penalty> {
    prop_oneof![
        (0.5..3.0f64).prop_map(|g| Penalty::Constant { g }),
        (0.5..2.0f64, 0.0..3.0f64).prop_map(|(base, slope)| Penalty::Linear { base, slope }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn mixing_commutes(a in water_mass(), b in water_mass()) {
        prop_assert!(same(&mix(a, b), &mix(b, a)));
    }

    #[test]
    fn mixing_associates(a in water_mass(), b in water_mass(), c in water_mass()) {
        prop_assert!(same(&mix(mix(a, b), c), &mix(a, mix(b, c))));
    }

    #[test]
    fn mixing_preserves_loads(a in water_mass(), b in water_mass()) {
        let (la, lb) = (a.loads_kg(), b.loads_kg());
        for (i, m) in mix(a, b).loads_kg().into_iter().enumerate() {
            prop_assert!(close(m, la[i] + lb[i], 1e-9));
        }
    }

    #[test]
    fn clean_water_is_free(v in 0.0..200.0f64, free in 200.0..400.0f64, p in penalty()) {
        let mut w = WwtpParams::new("w", 1);
        w.penalty = p;
        w.entrance_capacity = 200.0;
        w.treatment_capacity = 200.0;
        prop_assert_eq!(treatment_price(&w, &WaterMass::fresh(v), free), Ok(0.0));
    }

    #[test]
    fn price_grows_with_load_and_fill(
        m in water_mass(),
        extra in prop::array::uniform5(0.0..500.0f64),
        (f1, f2) in (0.0..1.0f64, 0.0..1.0f64),
        p in penalty(),
    ) {
        let mut w = WwtpParams::new("w", 1);
        w.penalty = p;
        w.entrance_capacity = 1000.0;
        w.treatment_capacity = 1000.0;
        let (lo, hi) = if f1 < f2 { (f1, f2) } else { (f2, f1) };
        // fuller plant, same water
        let free_more = 500.0 + 1500.0 * (1.0 - lo);
        let free_less = 500.0 + 1500.0 * (1.0 - hi);
        let a = treatment_price(&w, &m, free_more).unwrap();
        let b = treatment_price(&w, &m, free_less).unwrap();
        prop_assert!(b >= a - 1e-9 * a.abs().max(1.0));
        // dirtier water, same fill
        let mut dirtier = m;
        for (c, e) in dirtier.conc.iter_mut().zip(extra) {
            *c += e;
        }
        let c = treatment_price(&w, &dirtier, free_more).unwrap();
        prop_assert!(c >= a - 1e-9 * a.abs().max(1.0));
    }

    #[test]
    fn oversized_requests_are_rejected(m in water_mass(), short in 1e-6..100.0f64) {
        let w = WwtpParams::new("w", 1);
        prop_assume!(m.volume > short);
        prop_assert!(treatment_price(&w, &m, m.volume - short).is_err());
    }

    #[test]
    fn sewers_only_move_water(line in prop::collection::vec(water_mass(), 1..12), steps in 1usize..15) {
        let mut line = line;
        let before: f64 = line.iter().map(|m| m.volume).sum();
        let mut arrived = 0.0;
        for _ in 0..steps {
            arrived += sewer_advance(&mut line).volume;
        }
        let after: f64 = line.iter().map(|m| m.volume).sum();
        prop_assert!(close(before, after + arrived, 1e-9));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn plants_balance_their_water(
        inputs in prop::collection::vec((water_mass(), 0usize..6), 1..40),
        treat_cap in 10.0..200.0f64,
        entrance in 10.0..200.0f64,
        duration in 1u32..6,
    ) {
        let cfg = RiverConfig::small();
        let mut w = cfg.wwtps[0].clone();
        w.treatment_capacity = treat_cap;
        w.entrance_capacity = entrance;
        w.treatment_duration = duration;
        let mut env = RiverEnv::new(&cfg);
        let (mut released, mut bypassed) = (0.0, 0.0);
        let mut load_in = [0.0; 5];
        let mut load_out = [0.0; 5];
        for (m, d) in &inputs {
            env.advance();
            env.to_sewer(0, *d, *m).unwrap();
            for (acc, l) in load_in.iter_mut().zip(m.loads_kg()) {
                *acc += l;
            }
            let r = env.treat(0, &w).unwrap();
            released += r.released.volume;
            bypassed += r.bypassed.volume;
            for (acc, l) in load_out.iter_mut().zip(mix(r.released, r.bypassed).loads_kg()) {
                *acc += l;
            }
            let p = &env.plants[0];
            prop_assert!(p.treating() <= treat_cap + 1e-9);
            prop_assert!(p.entrance.volume <= entrance + 1e-9);
        }
        let p = &env.plants[0];
        let held = p.entrance.volume + p.treating() + p.in_transit();
        let total_in: f64 = inputs.iter().map(|(m, _)| m.volume).sum();
        prop_assert!(close(total_in, held + released + bypassed, 1e-9));
        prop_assert!(close(p.totals.into_sewer, total_in, 1e-9));
        let mut held_loads = mix(p.entrance, p.sewer.iter().fold(WaterMass::ZERO, |a, b| mix(a, *b)));
        for b in &p.batches {
            held_loads = mix(held_loads, b.mass);
        }
        for i in 0..5 {
            // treatment only removes pollutants
            prop_assert!(load_out[i] + held_loads.loads_kg()[i] <= load_in[i] * (1.0 + 1e-9) + 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn industry_storage_stays_within_capacity(seed in any::<u64>()) {
        let cfg = RiverConfig { seed, ..RiverConfig::default() };
        let mut c = river::build(&cfg, ExecutorConfig::with_workers(2)).unwrap();
        c.set_seed(seed);
        for _ in 0..12 {
            c.run(1).unwrap();
            for id in c.ids().collect::<Vec<_>>() {
                let b = &c.state(id).unwrap().beliefs;
                if let (Some(s), Some(cap)) = (b.get_f64("storage"), b.get_f64("capacity")) {
                    prop_assert!(s >= -1e-9 && s <= cap + 1e-9, "storage {} of {}", s, cap);
                }
            }
        }
    }
}
