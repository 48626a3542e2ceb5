//! Exact 0/1 solving: an internal branch-and-bound engine and a bridge to
//! external command-line solvers. Both return [`SolveOutcome`].

mod bnb;
mod external;
mod propagate;

use std::time::Duration;

use thiserror::Error;

use crate::ilp::IlpModel;

pub use external::{parse_solution_file, solve_external, ExternalSolver, SolutionFile, SolutionStatus};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverConfig {
    pub time_limit: Option<Duration>,
    pub node_limit: Option<u64>,
    /// Worker threads for subtree search. With more than one thread the
    /// optimal value is unchanged but the witness may differ between runs.
    pub threads: usize,
    /// Forwarded to external solvers; the internal engine is deterministic.
    pub seed: u64,
    /// Only assignments at least this good are of interest (`>=` when
    /// maximizing, `<=` when minimizing). `Infeasible` then means no such
    /// assignment exists.
    pub cutoff: Option<i64>,
    /// Bound nodes with the LP relaxation. Without it the search relies on
    /// row propagation alone and branches on the lowest undecided variable.
    pub lp_relaxation: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { time_limit: None, node_limit: None, threads: 1, seed: 0, cutoff: None, lp_relaxation: true }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assignment {
    pub values: Vec<bool>,
    pub objective: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LimitReason {
    Time,
    Nodes,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveOutcome {
    Optimal(Assignment),
    Infeasible,
    Limit(Option<Assignment>, LimitReason),
}

impl SolveOutcome {
    pub fn assignment(&self) -> Option<&Assignment> {
        match self {
            SolveOutcome::Optimal(a) | SolveOutcome::Limit(Some(a), _) => Some(a),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub nodes: u64,
    pub lp_solves: u64,
    pub max_depth: usize,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveReport {
    pub outcome: SolveOutcome,
    pub stats: SolveStats,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolverError {
    #[error("malformed model: {0}")]
    Malformed(String),
    #[error("LP relaxation failed: {0}")]
    Numerical(String),
    #[error("external solver: {0}")]
    Bridge(String),
}

/// Checks that a model references only its own variables and uses binary-safe
/// coefficients.
pub fn check_model(model: &IlpModel) -> Result<(), SolverError> {
    let n = model.variables.len();
    for row in &model.rows {
        for w in row.terms.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(SolverError::Malformed(format!("row {} repeats variable {}", row.name, w[0].0)));
            }
        }
        if let Some(&(v, _)) = row.terms.iter().find(|&&(v, _)| v >= n) {
            return Err(SolverError::Malformed(format!("row {} references variable {}", row.name, v)));
        }
    }
    if let Some(&(v, _)) = model.objective.iter().find(|&&(v, _)| v >= n) {
        return Err(SolverError::Malformed(format!("objective references variable {}", v)));
    }
    Ok(())
}

pub fn solve(model: &IlpModel, config: &SolverConfig) -> Result<SolveOutcome, SolverError> {
    Ok(solve_with(model, config, None)?.outcome)
}

/// Solves with an optional starting incumbent, which is used only if it
/// satisfies the model.
pub fn solve_with(model: &IlpModel, config: &SolverConfig, incumbent: Option<&[bool]>) -> Result<SolveReport, SolverError> {
    check_model(model)?;
    bnb::run(model, config, incumbent)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ilp::{Relation, Sense};

    #[test]
    fn single_variable_max() {
        let mut m = IlpModel::new(Sense::Maximize);
        let x = m.add_var("x");
        m.add_row("c", vec![(x, 1)], Relation::Le, 1);
        m.set_objective(vec![(x, 1)]);
        let out = solve(&m, &SolverConfig::default()).unwrap();
        assert_eq!(out, SolveOutcome::Optimal(Assignment { values: vec![true], objective: 1 }));
    }

    #[test]
    fn infeasible_model() {
        let mut m = IlpModel::new(Sense::Minimize);
        let x = m.add_var("x");
        let y = m.add_var("y");
        m.add_row("a", vec![(x, 1), (y, 1)], Relation::Ge, 2);
        m.add_row("b", vec![(x, 1), (y, 1)], Relation::Le, 1);
        assert_eq!(solve(&m, &SolverConfig::default()).unwrap(), SolveOutcome::Infeasible);
    }

    #[test]
    fn odd_cycle_needs_branching() {
        // Max independent set on a triangle: LP optimum 1.5, integer 1.
        let mut m = IlpModel::new(Sense::Maximize);
        let v: Vec<usize> = (0..3).map(|i| m.add_var(format!("v{}", i))).collect();
        for (a, b) in [(0, 1), (1, 2), (0, 2)] {
            m.add_row(format!("e{}{}", a, b), vec![(v[a], 1), (v[b], 1)], Relation::Le, 1);
        }
        m.set_objective(v.iter().map(|&x| (x, 1)).collect());
        let report = solve_with(&m, &SolverConfig::default(), None).unwrap();
        match report.outcome {
            SolveOutcome::Optimal(a) => {
                assert_eq!(a.objective, 1);
                assert_eq!(a.values, vec![true, false, false]);
            }
            other => panic!("{:?}", other),
        }
    }

    #[test]
    fn cutoff_turns_unreachable_target_into_infeasible() {
        let mut m = IlpModel::new(Sense::Maximize);
        let x = m.add_var("x");
        let y = m.add_var("y");
        m.add_row("c", vec![(x, 1), (y, 1)], Relation::Le, 1);
        m.set_objective(vec![(x, 1), (y, 1)]);
        let cfg = SolverConfig { cutoff: Some(2), ..SolverConfig::default() };
        assert_eq!(solve(&m, &cfg).unwrap(), SolveOutcome::Infeasible);
        let cfg = SolverConfig { cutoff: Some(1), ..SolverConfig::default() };
        assert_eq!(solve(&m, &cfg).unwrap().assignment().unwrap().objective, 1);
    }

    #[test]
    fn malformed_model_rejected() {
        let mut m = IlpModel::new(Sense::Maximize);
        m.add_var("x");
        m.add_row("c", vec![(3, 1)], Relation::Le, 1);
        assert!(matches!(solve(&m, &SolverConfig::default()), Err(SolverError::Malformed(_))));
    }

    #[test]
    fn node_limit_reports_limit() {
        let mut m = IlpModel::new(Sense::Maximize);
        let v: Vec<usize> = (0..5).map(|i| m.add_var(format!("v{}", i))).collect();
        for i in 0..5 {
            m.add_row(format!("e{}", i), vec![(v[i], 1), (v[(i + 1) % 5], 1)], Relation::Le, 1);
        }
        m.set_objective(v.iter().map(|&x| (x, 1)).collect());
        let cfg = SolverConfig { node_limit: Some(1), ..SolverConfig::default() };
        match solve(&m, &cfg).unwrap() {
            SolveOutcome::Limit(_, LimitReason::Nodes) => {}
            other => panic!("{:?}", other),
        }
        assert_eq!(solve(&m, &SolverConfig::default()).unwrap().assignment().unwrap().objective, 2);
    }

    #[test]
    fn invalid_incumbent_is_ignored() {
        let mut m = IlpModel::new(Sense::Maximize);
        let x = m.add_var("x");
        let y = m.add_var("y");
        m.add_row("c", vec![(x, 1), (y, 1)], Relation::Le, 1);
        m.set_objective(vec![(x, 1), (y, 2)]);
        let report = solve_with(&m, &SolverConfig::default(), Some(&[true, true])).unwrap();
        assert_eq!(report.outcome.assignment().unwrap().objective, 2);
        let report = solve_with(&m, &SolverConfig::default(), Some(&[false, true])).unwrap();
        assert_eq!(report.outcome, SolveOutcome::Optimal(Assignment { values: vec![false, true], objective: 2 }));
    }
}
