mod common;

use common::*;
use mapf_core::bench::{parse_instance, parse_solution, write_instance, write_solution};
use mapf_core::expansion::{canonical_flow, expand, flow_to_paths, paths_to_flow, CostProfile};
use mapf_core::graph::{Solution, Variant};
use mapf_core::ilp::build_tompp_model;
use mapf_core::planner::{tompp, PlannerConfig};
use proptest::prelude::*;

fn variant(k: u8) -> Variant {
    if k.is_multiple_of(2) {
        Variant::ForbidHeadOn
    } else {
        Variant::AllowHeadOn
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn instance_text_round_trips(seed in any::<u64>(), k in any::<u8>()) {
        let inst = random_small_instance(seed, 12, 4, variant(k));
        let text = write_instance(&inst);
        prop_assert_eq!(parse_instance(&text).unwrap(), inst);
    }

    #[test]
    fn solution_text_round_trips(paths in (1usize..5, 0usize..6).prop_flat_map(|(n, t)| proptest::collection::vec(proptest::collection::vec(0usize..50, t + 1), n))) {
        let sol = Solution::new(paths).unwrap();
        prop_assert_eq!(parse_solution(&write_solution(&sol)).unwrap(), sol);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn plans_round_trip_through_flows(seed in 0u64..10_000, k in any::<u8>(), unit_stay in any::<bool>()) {
        let inst = random_small_instance(seed, 8, 3, variant(k));
        prop_assume!(joint_bfs(&inst).is_some());
        let costs = if unit_stay { CostProfile::unit_stay() } else { CostProfile::default() };
        let cfg = PlannerConfig { costs, ..PlannerConfig::default() };
        let result = tompp(&inst, &cfg).unwrap();
        let plan = result.plan().unwrap();
        let net = expand(&inst, plan.horizon, costs).unwrap();

        // The solver's flow, checked row by row and arc by arc.
        prop_assert_eq!(flow_violations(&net, &plan.flow), 0);
        let model = build_tompp_model(&net, true);
        let values = model.flow_to_assignment(&plan.flow).unwrap();
        prop_assert_eq!(model.check(&values).unwrap(), inst.robot_count() as i64);

        // Paths to flow to paths is the identity, and so is the reverse on
        // canonical flows.
        let flow = paths_to_flow(&net, &plan.solution).unwrap();
        prop_assert_eq!(flow_violations(&net, &flow), 0);
        prop_assert_eq!(&flow_to_paths(&net, &flow).unwrap(), &plan.solution);
        prop_assert_eq!(&canonical_flow(&net, &plan.flow).unwrap(), &flow);
        prop_assert_eq!(paths_to_flow(&net, &flow_to_paths(&net, &flow).unwrap()).unwrap(), flow);
    }
}
