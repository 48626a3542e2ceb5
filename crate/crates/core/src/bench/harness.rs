//! Benchmark sweeps over random grid instances.
//!
//! A spec is a TOML file:
//!
//! ```toml
//! name = "smoke"
//! algorithms = ["tompp", "dompp-fixed", "disjoint"]
//! time_limit = 30.0
//! workers = 2
//!
//! [[grid]]
//! width = 10
//! height = 8
//! obstacle_pcts = [0.1]
//! robots = [5]
//! seeds = [0, 1, 2]
//! ```
//!
//! Every (grid, obstacle fraction, robot count, seed, algorithm) combination
//! is one run. Runs are independent and execute on a pool of `workers`
//! threads; records come back in run order.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::{gen_grid_instance, write_instance};
use crate::expansion::CostProfile;
use crate::graph::{MapfInstance, Solution};
use crate::heuristic::{disjoint_distance, local_repair_solve, RepairConfig, RepairOutcome};
use crate::planner::{dompp, tompp, DomppMode, PlanError, PlanResult, PlannerConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Tompp,
    DomppFull,
    /// Distance-optimal at the time-optimal horizon.
    DomppFixed,
    Heuristic,
    /// Sum of individual shortest paths; a bound, not a plan.
    Disjoint,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Tompp => "tompp",
            Algorithm::DomppFull => "dompp-full",
            Algorithm::DomppFixed => "dompp-fixed",
            Algorithm::Heuristic => "heuristic",
            Algorithm::Disjoint => "disjoint",
        }
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        [Algorithm::Tompp, Algorithm::DomppFull, Algorithm::DomppFixed, Algorithm::Heuristic, Algorithm::Disjoint]
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown algorithm `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSweep {
    pub width: usize,
    pub height: usize,
    pub obstacle_pcts: Vec<f64>,
    pub robots: Vec<usize>,
    pub seeds: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchSpec {
    pub name: String,
    pub algorithms: Vec<Algorithm>,
    /// Seconds per run.
    pub time_limit: f64,
    #[serde(default = "one")]
    pub workers: usize,
    #[serde(default)]
    pub stay_cost: i64,
    pub grid: Vec<GridSweep>,
}

fn one() -> usize {
    1
}

impl FromStr for BenchSpec {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, BenchError> {
        let spec: BenchSpec = toml::from_str(s).map_err(|e| BenchError::Spec(e.to_string()))?;
        if !(spec.time_limit > 0.0 && spec.time_limit.is_finite()) {
            return Err(BenchError::Spec(format!("time_limit must be positive, got {}", spec.time_limit)));
        }
        if spec.workers == 0 {
            return Err(BenchError::Spec("workers must be at least 1".into()));
        }
        Ok(spec)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BenchError {
    #[error("invalid bench spec: {0}")]
    Spec(String),
    #[error("thread pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunOutcome {
    Solved,
    Unsolvable,
    Limit,
    /// Only a distance bound was computed.
    Bound,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceParams {
    pub width: usize,
    pub height: usize,
    pub obstacle_pct: f64,
    pub robots: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub index: usize,
    /// SHA-256 of the serialized instance, empty if generation failed.
    pub instance_hash: String,
    pub params: InstanceParams,
    pub algorithm: Algorithm,
    pub outcome: RunOutcome,
    pub makespan: Option<usize>,
    pub distance: Option<usize>,
    /// Percentage of robots whose final vertex is their goal.
    pub goals_reached: f64,
    /// Seconds; informational.
    pub time: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// What one algorithm produced on one instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlgorithmRun {
    pub outcome: RunOutcome,
    /// The plan when solved, or the best partial one on a limit.
    pub solution: Option<Solution>,
    /// Set for [`Algorithm::Disjoint`].
    pub bound: Option<usize>,
}

fn from_plan(result: PlanResult) -> AlgorithmRun {
    match result {
        PlanResult::Solved(p) => AlgorithmRun { outcome: RunOutcome::Solved, solution: Some(p.solution), bound: None },
        PlanResult::Unsolvable(..) => AlgorithmRun { outcome: RunOutcome::Unsolvable, solution: None, bound: None },
        PlanResult::Limit(_, best, _) => AlgorithmRun { outcome: RunOutcome::Limit, solution: best, bound: None },
    }
}

/// Runs `algorithm` with the limits in `config`. The time limit covers both
/// solves of [`Algorithm::DomppFixed`].
pub fn run_algorithm(instance: &MapfInstance, algorithm: Algorithm, config: &PlannerConfig) -> Result<AlgorithmRun, PlanError> {
    let start = Instant::now();
    Ok(match algorithm {
        Algorithm::Tompp => from_plan(tompp(instance, config)?),
        Algorithm::DomppFull => from_plan(dompp(instance, DomppMode::Full, config)?),
        Algorithm::DomppFixed => match tompp(instance, config)? {
            PlanResult::Solved(p) => {
                let mut cfg = config.clone();
                cfg.solver.time_limit = config.solver.time_limit.map(|l| l.saturating_sub(start.elapsed()));
                let run = from_plan(dompp(instance, DomppMode::FixedT(p.horizon), &cfg)?);
                if run.outcome == RunOutcome::Limit && run.solution.is_none() {
                    // The time-optimal plan is still a plan of this horizon.
                    AlgorithmRun { solution: Some(p.solution), ..run }
                } else {
                    run
                }
            }
            other => from_plan(other),
        },
        Algorithm::Heuristic => {
            let repair = RepairConfig { time_limit: config.solver.time_limit, ..RepairConfig::default() };
            match local_repair_solve(instance, &repair)?.outcome {
                RepairOutcome::Solved(s) => AlgorithmRun { outcome: RunOutcome::Solved, solution: Some(s), bound: None },
                RepairOutcome::Unsolvable(_) => AlgorithmRun { outcome: RunOutcome::Unsolvable, solution: None, bound: None },
                RepairOutcome::Limit(s) => AlgorithmRun { outcome: RunOutcome::Limit, solution: Some(s), bound: None },
            }
        }
        Algorithm::Disjoint => match disjoint_distance(instance) {
            Ok(d) => AlgorithmRun { outcome: RunOutcome::Bound, solution: None, bound: Some(d) },
            Err(_) => AlgorithmRun { outcome: RunOutcome::Unsolvable, solution: None, bound: None },
        },
    })
}

pub fn instance_hash(instance: &MapfInstance) -> String {
    hex::encode(Sha256::digest(write_instance(instance).as_bytes()))
}

fn goals_reached(instance: &MapfInstance, run: &AlgorithmRun) -> f64 {
    if instance.robot_count() == 0 {
        return 100.0;
    }
    let last = match &run.solution {
        Some(s) => s.configuration(s.horizon()),
        None => instance.starts().to_vec(),
    };
    let at = last.iter().zip(instance.goals()).filter(|(a, b)| a == b).count();
    100.0 * at as f64 / instance.robot_count() as f64
}

fn planner_config(spec: &BenchSpec) -> PlannerConfig {
    let mut cfg = PlannerConfig { costs: CostProfile { traverse_cost: 1, stay_cost: spec.stay_cost }, ..PlannerConfig::default() };
    cfg.solver.time_limit = Some(Duration::from_secs_f64(spec.time_limit));
    cfg
}

fn execute(index: usize, params: InstanceParams, algorithm: Algorithm, config: &PlannerConfig) -> BenchRecord {
    let start = Instant::now();
    let mut record = BenchRecord {
        index,
        instance_hash: String::new(),
        params,
        algorithm,
        outcome: RunOutcome::Error,
        makespan: None,
        distance: None,
        goals_reached: 0.0,
        time: 0.0,
        error: None,
    };
    let p = &record.params;
    match gen_grid_instance(p.width, p.height, p.obstacle_pct, p.robots, p.seed) {
        Err(e) => record.error = Some(e.to_string()),
        Ok(instance) => {
            record.instance_hash = instance_hash(&instance);
            match run_algorithm(&instance, algorithm, config) {
                Err(e) => record.error = Some(e.to_string()),
                Ok(run) => {
                    record.outcome = run.outcome;
                    record.goals_reached = goals_reached(&instance, &run);
                    if run.outcome == RunOutcome::Solved {
                        let s = run.solution.as_ref().expect("solved runs carry a plan");
                        record.makespan = Some(s.makespan());
                        record.distance = Some(s.total_distance());
                    }
                    if let Some(b) = run.bound {
                        record.distance = Some(b);
                        record.makespan = instance.shortest_lengths().ok().map(|l| l.into_iter().max().unwrap_or(0));
                    }
                }
            }
        }
    }
    record.time = start.elapsed().as_secs_f64();
    record
}

/// Every run of the sweep, in order.
pub fn expand_runs(spec: &BenchSpec) -> Vec<(InstanceParams, Algorithm)> {
    let mut runs = Vec::new();
    for g in &spec.grid {
        for &obstacle_pct in &g.obstacle_pcts {
            for &robots in &g.robots {
                for &seed in &g.seeds {
                    for &a in &spec.algorithms {
                        runs.push((InstanceParams { width: g.width, height: g.height, obstacle_pct, robots, seed }, a));
                    }
                }
            }
        }
    }
    runs
}

/// Runs the sweep. Failed runs become records with outcome `error`.
pub fn run_benchmark(spec: &BenchSpec) -> Result<Vec<BenchRecord>, BenchError> {
    let config = planner_config(spec);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(spec.workers).build().map_err(|e| BenchError::Pool(e.to_string()))?;
    let runs = expand_runs(spec);
    Ok(pool.install(|| runs.into_par_iter().enumerate().map(|(i, (p, a))| execute(i, p, a, &config)).collect()))
}

/// One JSON object per line.
pub fn records_to_jsonl(records: &[BenchRecord]) -> String {
    records.iter().map(|r| serde_json::to_string(r).expect("records serialize") + "\n").collect()
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    (count > 0).then(|| sum / count as f64)
}

/// Means per cell. A superscript `k/n` marks cells where only `k` of the
/// `n` runs were solved; means cover the solved runs.
pub fn render_table(records: &[BenchRecord]) -> String {
    type Cell = (usize, usize, String, usize, Algorithm);
    let mut cells: BTreeMap<Cell, Vec<&BenchRecord>> = BTreeMap::new();
    for r in records {
        let p = &r.params;
        cells.entry((p.width, p.height, format!("{:.2}", p.obstacle_pct), p.robots, r.algorithm)).or_default().push(r);
    }
    let mut out = String::new();
    writeln!(out, "{:<9} {:>9} {:>6} {:<12} {:>14} {:>10} {:>10} {:>8}", "grid", "obstacles", "robots", "algorithm", "time (s)", "makespan", "distance", "goals %").unwrap();
    for ((w, h, pct, robots, algo), rs) in &cells {
        let done: Vec<&&BenchRecord> = rs.iter().filter(|r| matches!(r.outcome, RunOutcome::Solved | RunOutcome::Bound)).collect();
        let mark = if done.len() == rs.len() { String::new() } else { format!("^{}/{}", done.len(), rs.len()) };
        let fmt = |v: Option<f64>, prec: usize| v.map_or("-".to_string(), |v| format!("{v:.prec$}"));
        let time = format!("{}{}", fmt(mean(done.iter().map(|r| r.time)), 3), mark);
        writeln!(
            out,
            "{:<9} {:>9} {:>6} {:<12} {:>14} {:>10} {:>10} {:>8}",
            format!("{w}x{h}"),
            pct,
            robots,
            algo.name(),
            time,
            fmt(mean(done.iter().filter_map(|r| r.makespan.map(|m| m as f64))), 2),
            fmt(mean(done.iter().filter_map(|r| r.distance.map(|d| d as f64))), 2),
            fmt(mean(rs.iter().map(|r| r.goals_reached)), 1),
        )
        .unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const SPEC: &str = r#"
name = "tiny"
algorithms = ["tompp", "disjoint"]
time_limit = 60.0
workers = 2

[[grid]]
width = 10
height = 8
obstacle_pcts = [0.1]
robots = [5]
seeds = [0, 1, 2]
"#;

    #[test]
    fn spec_parses_and_rejects_junk() {
        let spec: BenchSpec = SPEC.parse().unwrap();
        assert_eq!(spec.algorithms, vec![Algorithm::Tompp, Algorithm::Disjoint]);
        assert_eq!(expand_runs(&spec).len(), 6);
        assert!(SPEC.replace("workers = 2", "wokers = 2").parse::<BenchSpec>().is_err());
        assert!(SPEC.replace("\"tompp\"", "\"astar\"").parse::<BenchSpec>().is_err());
        assert!(SPEC.replace("60.0", "0.0").parse::<BenchSpec>().is_err());
    }

    #[test]
    fn algorithm_names_round_trip() {
        for a in [Algorithm::Tompp, Algorithm::DomppFull, Algorithm::DomppFixed, Algorithm::Heuristic, Algorithm::Disjoint] {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
    }

    #[test]
    fn tiny_sweep() {
        let mut spec: BenchSpec = SPEC.parse().unwrap();
        let records = run_benchmark(&spec).unwrap();
        assert_eq!(records.len(), 6);
        assert!(records.iter().enumerate().all(|(i, r)| r.index == i));
        for pair in records.chunks(2) {
            assert_eq!(pair[0].instance_hash, pair[1].instance_hash);
            assert_eq!(pair[0].outcome, RunOutcome::Solved);
            assert_eq!(pair[0].goals_reached, 100.0);
            assert!(pair[1].distance <= pair[0].distance);
        }
        let table = render_table(&records);
        assert_eq!(table.lines().count(), 3);

        spec.workers = 1;
        let again = run_benchmark(&spec).unwrap();
        let strip = |rs: &[BenchRecord]| rs.iter().map(|r| BenchRecord { time: 0.0, ..r.clone() }).collect::<Vec<_>>();
        assert_eq!(strip(&records), strip(&again));
        let jsonl = records_to_jsonl(&records);
        let back: BenchRecord = serde_json::from_str(jsonl.lines().next().unwrap()).unwrap();
        assert_eq!(back, records[0]);
    }

    #[test]
    fn generation_failure_is_a_record() {
        let spec = BenchSpec {
            name: "bad".into(),
            algorithms: vec![Algorithm::Tompp],
            time_limit: 1.0,
            workers: 1,
            stay_cost: 0,
            grid: vec![GridSweep { width: 2, height: 2, obstacle_pcts: vec![0.5], robots: vec![3], seeds: vec![0] }],
        };
        let records = run_benchmark(&spec).unwrap();
        assert_eq!(records[0].outcome, RunOutcome::Error);
        assert!(records[0].error.is_some());
    }
}
