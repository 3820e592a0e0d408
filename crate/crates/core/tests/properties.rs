use std::collections::BTreeSet;

use platoon_core::allocator::{rspg_run, PlatoonIssue};
use platoon_core::metrics::{hop_rate, platoon_hops, platoon_latency, qos_satisfaction, Timing};
use platoon_core::scenario::distribute_vehicles;
use platoon_core::{generate_scenario, GroupcastEnv, GroupcastRole, Method, ModelParams, Scenario, ScenarioEnv};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rspg_invariants_on_random_scenarios(seed in any::<u64>(), total in 10usize..=55) {
        let params = ModelParams::default();
        let scenario = generate_scenario(&params, total, seed).unwrap();
        let env = ScenarioEnv::new(&scenario).unwrap();
        let trace = rspg_run(&env);
        let alloc = trace.clone().into_allocation(&env);
        alloc.validate_for(&scenario).unwrap();

        for m in &alloc.matches {
            prop_assert!(m.power_mw > 0.0 && m.power_mw <= params.p_max_mw);
        }
        prop_assert_eq!(qos_satisfaction(&env, &alloc), 1.0);

        let leader_ies: BTreeSet<_> = trace.leader_matches.iter().map(|c| c.ie).collect();
        let leader_ks: BTreeSet<_> = trace.leader_matches.iter().map(|c| c.subchannel).collect();
        for c in &trace.relay_candidates {
            prop_assert!(!leader_ies.contains(&c.ie) && !leader_ks.contains(&c.subchannel));
        }

        let missing = alloc
            .issues
            .iter()
            .filter(|i| matches!(i, Some(PlatoonIssue::NoLeaderMatch | PlatoonIssue::RelayUnmatched)))
            .count();
        prop_assert_eq!(alloc.subchannel_count() + missing, params.num_platoons + alloc.relay_count());

        let timing = Timing::from_params(&params);
        for m in 0..params.num_platoons {
            let hops = platoon_hops(&alloc, m, env.platoon_size(m));
            let first = timing.hop_latency_ms(hop_rate(&env, &hops[0]));
            prop_assert!(platoon_latency(&env, &alloc, m, &timing) >= first);
        }
    }

    #[test]
    fn baselines_use_fixed_subchannel_counts(seed in any::<u64>(), total in 10usize..=55) {
        let params = ModelParams::default();
        let scenario = generate_scenario(&params, total, seed).unwrap();
        let env = ScenarioEnv::new(&scenario).unwrap();
        let no_relay = Method::NoRelay.allocate(&env);
        let centralized = Method::Centralized.allocate(&env);
        no_relay.validate_for(&scenario).unwrap();
        centralized.validate_for(&scenario).unwrap();
        prop_assert_eq!(no_relay.subchannel_count(), params.num_platoons);
        prop_assert_eq!(centralized.subchannel_count(), 2 * params.num_platoons);
        prop_assert!(centralized.matches.iter().all(|m| m.role == GroupcastRole::Leader || centralized.relays[m.platoon].is_some()));
    }

    #[test]
    fn scenario_text_round_trip_is_exact(seed in any::<u64>(), total in 10usize..=55) {
        let scenario = generate_scenario(&ModelParams::default(), total, seed).unwrap();
        let text = scenario.to_json().unwrap();
        let back = Scenario::from_json(&text).unwrap();
        prop_assert_eq!(&back, &scenario);
        prop_assert_eq!(back.to_json().unwrap(), text);
    }

    #[test]
    fn vehicle_split_is_balanced(total in 10usize..=55, seed in any::<u64>()) {
        let sizes = distribute_vehicles(total, 5, 11, seed).unwrap();
        prop_assert_eq!(sizes.iter().sum::<usize>(), total);
        let lo = *sizes.iter().min().unwrap();
        let hi = *sizes.iter().max().unwrap();
        prop_assert!(hi - lo <= 1 && lo >= 2 && hi <= 11);
    }
}

#[test]
fn growing_a_sweep_point_only_lengthens_platoons() {
    let params = ModelParams::default();
    for seed in 0..10 {
        let small = generate_scenario(&params, 20, seed).unwrap();
        let large = generate_scenario(&params, 45, seed).unwrap();
        assert_eq!(small.ies, large.ies);
        for (a, b) in small.platoons.iter().zip(&large.platoons) {
            assert!(a.len() < b.len());
            assert_eq!(a.vehicles[..], b.vehicles[..a.len()]);
        }
    }
}
