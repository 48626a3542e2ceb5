//! The external solver bridge, exercised with shell-script stand-ins.

use std::fs;
use std::path::Path;
use std::time::Duration;

use mapf_core::expansion::{expand, CostProfile};
use mapf_core::graph::{Graph, MapfInstance, Variant};
use mapf_core::ilp::{build_tompp_model, IlpModel};
use mapf_core::planner::{tompp, PlanResult, PlannerConfig, Unsolvable};
use mapf_core::solver::{solve, solve_external, ExternalSolver, SolveOutcome, SolverConfig, SolverError};

fn model() -> IlpModel {
    let g = Graph::new(3, [(0, 1), (1, 2)]).unwrap();
    let inst = MapfInstance::new(g, vec![0, 1], vec![1, 2], Variant::ForbidHeadOn).unwrap();
    build_tompp_model(&expand(&inst, 2, CostProfile::default()).unwrap(), true)
}

/// A solver that runs `body` with `$1` the LP file and `$2` the solution file.
fn mock(dir: &Path, body: &str) -> ExternalSolver {
    let script = dir.join("mock.sh");
    fs::write(&script, format!("#!/bin/sh\n{body}\n")).unwrap();
    ExternalSolver::new(format!("sh {} {{lp}} {{sol}} {{seed}} {{time_limit}}", script.display()), dir.join("work"))
}

fn solution_text(model: &IlpModel, values: &[bool]) -> String {
    let mut s = String::from("status optimal\n");
    for (v, &x) in model.variables.iter().zip(values) {
        if x {
            s.push_str(&format!("{} 1\n", v.name));
        }
    }
    s
}

#[test]
fn returns_checked_assignment() {
    let dir = tempfile::tempdir().unwrap();
    let m = model();
    let internal = solve(&m, &SolverConfig::default()).unwrap();
    let values = &internal.assignment().unwrap().values;
    let prepared = dir.path().join("prepared.sol");
    fs::write(&prepared, solution_text(&m, values)).unwrap();
    let solver = mock(dir.path(), &format!("grep -q '^Maximize' \"$1\" && cp {} \"$2\"", prepared.display()));
    let out = solve_external(&m, &solver, &SolverConfig::default()).unwrap();
    assert_eq!(out, internal);
}

#[test]
fn passes_seed_and_time_limit() {
    let dir = tempfile::tempdir().unwrap();
    let args = dir.path().join("args.txt");
    let solver = mock(dir.path(), &format!("echo \"$3 $4\" > {}\necho 'status infeasible' > \"$2\"", args.display()));
    let cfg = SolverConfig { seed: 17, time_limit: Some(Duration::from_millis(2500)), ..SolverConfig::default() };
    assert_eq!(solve_external(&model(), &solver, &cfg).unwrap(), SolveOutcome::Infeasible);
    assert_eq!(fs::read_to_string(args).unwrap().trim(), "17 2.5");
}

#[test]
fn rejects_bad_output() {
    let dir = tempfile::tempdir().unwrap();
    let m = model();
    let cases = [
        ("exit 3", "exited"),
        ("echo 'x_1_0 0.5' > \"$2\"", "non-binary"),
        ("echo 'nonsense 1' > \"$2\"", "unknown variable"),
        // Routes robot 1 without any path: breaks conservation.
        ("echo 'x_1_32 1' > \"$2\"", "rejected"),
        ("true", "reading solution file"),
    ];
    for (body, needle) in cases {
        let err = solve_external(&m, &mock(dir.path(), body), &SolverConfig::default()).unwrap_err();
        let SolverError::Bridge(msg) = &err else { panic!("{body}: {err:?}") };
        assert!(msg.contains(needle), "{body}: {msg}");
    }
    let missing = ExternalSolver::new("/nonexistent/solver {lp}", dir.path().join("w"));
    assert!(matches!(solve_external(&m, &missing, &SolverConfig::default()), Err(SolverError::Bridge(_))));
}

#[test]
fn limit_without_values() {
    let dir = tempfile::tempdir().unwrap();
    let solver = mock(dir.path(), "echo 'status limit' > \"$2\"");
    assert!(matches!(solve_external(&model(), &solver, &SolverConfig::default()).unwrap(), SolveOutcome::Limit(None, _)));
}

#[test]
fn planner_uses_the_bridge() {
    let dir = tempfile::tempdir().unwrap();
    let calls = dir.path().join("calls");
    let solver = mock(dir.path(), &format!("echo x >> {}\necho 'status infeasible' > \"$2\"", calls.display()));
    // Two robots swapping on a single edge: every horizon is infeasible.
    let g = Graph::new(2, [(0, 1)]).unwrap();
    let inst = MapfInstance::new(g, vec![0, 1], vec![1, 0], Variant::ForbidHeadOn).unwrap();
    let cfg = PlannerConfig { external: Some(solver), prune: false, ..PlannerConfig::default() };
    let result = tompp(&inst, &cfg).unwrap();
    assert!(matches!(result, PlanResult::Unsolvable(Unsolvable::ConfigurationBound { .. }, _)));
    assert!(fs::read_to_string(calls).unwrap().lines().count() >= 1);
}
