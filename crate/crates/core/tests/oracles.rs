mod common;

use common::*;
use mapf_core::expansion::expand;
use mapf_core::graph::{validate_solution, Variant};
use mapf_core::ilp::{build_dompp_model, build_tompp_model, IlpModel, Relation, Sense};
use mapf_core::planner::{dompp, tompp, DomppMode, PlanResult, PlannerConfig, Unsolvable};
use mapf_core::puzzle::{all_moves, bfs_distance, branching_counts, depth_histogram, enumerate_cycles, random_state};
use mapf_core::solver::{solve, SolveOutcome, SolverConfig};
use proptest::prelude::*;

fn solvable(seed: u64, max_v: usize, max_r: usize, variant: Variant) -> Option<(mapf_core::graph::MapfInstance, usize)> {
    let inst = random_small_instance(seed, max_v, max_r, variant);
    joint_bfs(&inst).map(|d| (inst, d))
}

#[test]
fn tompp_matches_joint_bfs() {
    for variant in [Variant::ForbidHeadOn, Variant::AllowHeadOn] {
        let mut checked = 0;
        for seed in 0..60 {
            let Some((inst, depth)) = solvable(seed, 8, 3, variant.clone()) else { continue };
            let plan = tompp(&inst, &PlannerConfig::default()).unwrap();
            let plan = plan.plan().unwrap_or_else(|| panic!("seed {seed} unsolved"));
            assert_eq!(plan.horizon, depth, "seed {seed} {:?}", variant);
            assert!(validate_solution(&inst, &plan.solution).unwrap().is_valid());
            checked += 1;
        }
        assert!(checked >= 30, "only {checked} solvable instances");
    }
}

#[test]
fn unsolvable_small_instances_agree() {
    // A path with two robots that must pass each other cannot be solved.
    let mut found = 0;
    for seed in 0..200 {
        let inst = random_small_instance(seed, 5, 2, Variant::ForbidHeadOn);
        if joint_bfs(&inst).is_some() {
            continue;
        }
        match tompp(&inst, &PlannerConfig::default()).unwrap() {
            PlanResult::Unsolvable(Unsolvable::ConfigurationBound { .. } | Unsolvable::Unreachable { .. }, _) => found += 1,
            other => panic!("seed {seed}: expected unsolvable, got {:?}", other.plan().map(|p| p.horizon)),
        }
        if found == 5 {
            break;
        }
    }
    assert!(found > 0);
}

#[test]
fn dompp_full_matches_joint_dijkstra() {
    let mut checked = 0;
    for seed in 100..160 {
        let Some((inst, _)) = solvable(seed, 6, 2, Variant::ForbidHeadOn) else { continue };
        let (distance, _) = joint_min_distance(&inst).unwrap();
        let plan = dompp(&inst, DomppMode::Full, &PlannerConfig::default()).unwrap();
        let plan = plan.plan().unwrap();
        assert_eq!(plan.solution.total_distance(), distance, "seed {seed}");
        checked += 1;
        if checked == 15 {
            break;
        }
    }
    assert_eq!(checked, 15);
}

#[test]
fn network_models_match_brute_force() {
    let mut checked = 0;
    for seed in 0..80 {
        let Some((inst, depth)) = solvable(seed, 5, 2, Variant::ForbidHeadOn) else { continue };
        for horizon in depth.saturating_sub(1)..=depth {
            let net = expand(&inst, horizon, Default::default()).unwrap();
            for model in [build_tompp_model(&net, true), build_dompp_model(&net, true)] {
                if model.free_var_count() > 20 {
                    continue;
                }
                let expected = brute_force(&model);
                for lp in [true, false] {
                    let cfg = SolverConfig { lp_relaxation: lp, ..SolverConfig::default() };
                    let got = match solve(&model, &cfg).unwrap() {
                        SolveOutcome::Optimal(a) => Some(a.objective),
                        SolveOutcome::Infeasible => None,
                        SolveOutcome::Limit(..) => panic!("no limits set"),
                    };
                    assert_eq!(got, expected, "seed {seed} horizon {horizon} lp {lp}");
                }
                checked += 1;
            }
        }
    }
    assert!(checked >= 10, "only {checked} models small enough");
}

fn arb_model() -> impl Strategy<Value = IlpModel> {
    let sense = prop_oneof![Just(Sense::Maximize), Just(Sense::Minimize)];
    let relation = prop_oneof![Just(Relation::Le), Just(Relation::Eq), Just(Relation::Ge)];
    (1usize..=10, sense).prop_flat_map(move |(n, sense)| {
        let row = (proptest::collection::btree_map(0..n, -2i64..=3, 1..=n.min(5)), relation.clone(), -2i64..=4);
        (
            Just(n),
            Just(sense),
            proptest::collection::vec(row, 0..=6),
            proptest::collection::btree_map(0..n, -3i64..=3, 0..=n),
            proptest::collection::vec(proptest::option::of(any::<bool>()), n),
        )
            .prop_map(|(n, sense, rows, obj, fixes)| {
                let mut m = IlpModel::new(sense);
                for v in 0..n {
                    m.add_var(format!("x{v}"));
                }
                for (v, f) in fixes.into_iter().enumerate() {
                    // Keep most variables free.
                    if let Some(b) = f.filter(|_| v % 3 == 0) {
                        m.fix(v, b);
                    }
                }
                for (k, (terms, rel, rhs)) in rows.into_iter().enumerate() {
                    m.add_row(format!("r{k}"), terms.into_iter().collect(), rel, rhs);
                }
                m.set_objective(obj.into_iter().collect());
                m
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn solver_matches_brute_force(model in arb_model(), lp in any::<bool>()) {
        let cfg = SolverConfig { lp_relaxation: lp, ..SolverConfig::default() };
        let got = solve(&model, &cfg).unwrap();
        match (&got, brute_force(&model)) {
            (SolveOutcome::Optimal(a), Some(best)) => {
                prop_assert_eq!(a.objective, best);
                prop_assert_eq!(model.check(&a.values).ok(), Some(best));
            }
            (SolveOutcome::Infeasible, None) => {}
            (other, expected) => prop_assert!(false, "solver {:?} vs brute force {:?}", other, expected),
        }
    }

    #[test]
    fn cutoff_agrees_with_optimum(model in arb_model(), slack in 0i64..=2) {
        let Some(best) = brute_force(&model) else { return Ok(()) };
        let target = match model.sense { Sense::Maximize => best + slack, Sense::Minimize => best - slack };
        let cfg = SolverConfig { cutoff: Some(target), lp_relaxation: false, ..SolverConfig::default() };
        let out = solve(&model, &cfg).unwrap();
        if slack == 0 {
            prop_assert!(matches!(out, SolveOutcome::Optimal(_)));
        } else {
            prop_assert_eq!(out, SolveOutcome::Infeasible);
        }
    }
}

#[test]
fn cycle_counts_match_edge_subsets() {
    for n in [3, 4] {
        let (single, oriented) = grid_cycle_census(n);
        assert_eq!(enumerate_cycles(n).unwrap().len() as u64, single, "n = {n}");
        let counts = branching_counts(n).unwrap();
        assert_eq!(counts.single, 2 * single);
        assert_eq!(counts.full, oriented);
        assert_eq!(all_moves(n).unwrap().len() as u64, oriented);
    }
}

#[test]
fn puzzle_bfs_matches_plain_search() {
    let dist = puzzle3_distances();
    assert_eq!(dist.len(), 362_880);
    let mut hist = vec![0usize; *dist.values().max().unwrap() as usize + 1];
    for &d in dist.values() {
        hist[d as usize] += 1;
    }
    assert_eq!(depth_histogram(), hist);
    for seed in 0..200 {
        let s = random_state(3, seed).unwrap();
        let key: Vec<u8> = s.cells().iter().map(|&c| c as u8).collect();
        assert_eq!(bfs_distance(&s).unwrap(), dist[&key] as usize, "seed {seed}");
    }
}
