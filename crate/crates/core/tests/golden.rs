//! Byte-for-byte comparisons against files in `tests/golden`. Set
//! `UPDATE_GOLDEN=1` to rewrite them after an intended format change.

use std::fs;
use std::path::PathBuf;

use mapf_core::bench::{fig1_instance, fig2_instance, parse_instance, parse_solution, write_instance, write_solution};
use mapf_core::expansion::{expand, CostProfile};
use mapf_core::graph::{validate_solution, Graph, MapfInstance, Variant};
use mapf_core::ilp::{build_dompp_model, build_tompp_model, lp_string};
use mapf_core::planner::{tompp, PlannerConfig};

fn check(name: &str, actual: &str) {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        fs::write(&path, actual).unwrap();
    }
    let expected = fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(actual, expected, "{name} differs from its golden file");
}

fn swap_line() -> MapfInstance {
    let g = Graph::new(3, [(0, 1), (1, 2)]).unwrap();
    MapfInstance::new(g, vec![0, 1], vec![1, 2], Variant::ForbidHeadOn).unwrap()
}

#[test]
fn instance_files() {
    check("fig1_t4.instance", &write_instance(&fig1_instance(4).unwrap()));
    check("fig2.instance", &write_instance(&fig2_instance()));
}

#[test]
fn fig2_plan() {
    let inst = fig2_instance();
    let result = tompp(&inst, &PlannerConfig::default()).unwrap();
    let sol = &result.plan().unwrap().solution;
    check("fig2.solution", &write_solution(sol));
    let text = include_str!("golden/fig2.solution");
    let parsed = parse_solution(text).unwrap();
    assert!(validate_solution(&parse_instance(include_str!("golden/fig2.instance")).unwrap(), &parsed).unwrap().is_valid());
}

#[test]
fn lp_exports() {
    let net = expand(&swap_line(), 2, CostProfile::default()).unwrap();
    check("line_t2_tompp.lp", &lp_string(&build_tompp_model(&net, true)));
    let net = expand(&swap_line(), 2, CostProfile::unit_stay()).unwrap();
    check("line_t2_dompp_unit_stay.lp", &lp_string(&build_dompp_model(&net, false)));
}
