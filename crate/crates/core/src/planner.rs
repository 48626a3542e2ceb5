//! Time-optimal and distance-optimal planning by solving the network models
//! over increasing or fixed horizons.

use std::time::{Duration, Instant};

use log::info;
use thiserror::Error;

use crate::expansion::{canonical_flow, expand, flow_to_paths, route_arcs, trace_robot, CostProfile, ExpansionError, Flow, TimeExpandedNetwork};
use crate::graph::{validate_solution, MapfInstance, RobotId, Solution};
use crate::ilp::{build_dompp_model, build_tompp_model, IlpModel};
use crate::solver::{solve_external, solve_with, ExternalSolver, LimitReason, SolveOutcome, SolveStats, SolverConfig, SolverError};

#[derive(Debug, Clone)]
pub struct PlannerConfig {
    /// Limits apply to the whole planning call, not to each horizon.
    pub solver: SolverConfig,
    pub external: Option<ExternalSolver>,
    pub costs: CostProfile,
    pub prune: bool,
    /// Horizons above this report `Limit`.
    pub t_max_override: Option<usize>,
    /// Horizons above this report `Limit` even when the configuration bound
    /// has not been reached.
    pub horizon_ceiling: usize,
    /// Ask the solver only whether every robot can be routed, instead of
    /// maximizing the number routed. Much faster on infeasible horizons.
    pub require_full_flow: bool,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            solver: SolverConfig::default(),
            external: None,
            costs: CostProfile::default(),
            prune: true,
            t_max_override: None,
            horizon_ceiling: 256,
            require_full_flow: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HorizonStats {
    pub horizon: usize,
    pub outcome: &'static str,
    pub objective: Option<i64>,
    pub variables: usize,
    pub free_variables: usize,
    pub rows: usize,
    pub solve: SolveStats,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PlanStats {
    pub horizons: Vec<HorizonStats>,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plan {
    pub solution: Solution,
    pub horizon: usize,
    pub objective: i64,
    /// The flow as returned by the solver, before canonicalization.
    pub flow: Flow,
    pub stats: PlanStats,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unsolvable {
    Unreachable { robot: RobotId },
    /// Every horizon up to the number of distinct configurations failed.
    ConfigurationBound { horizon: usize },
    /// No solution with exactly this horizon.
    AtHorizon { horizon: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlanLimit {
    Solver { reason: LimitReason, horizon: usize },
    Ceiling { horizon: usize },
    Override { horizon: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlanResult {
    Solved(Plan),
    Unsolvable(Unsolvable, PlanStats),
    Limit(PlanLimit, Option<Solution>, PlanStats),
}

impl PlanResult {
    pub fn plan(&self) -> Option<&Plan> {
        match self {
            PlanResult::Solved(p) => Some(p),
            _ => None,
        }
    }

    pub fn stats(&self) -> &PlanStats {
        match self {
            PlanResult::Solved(p) => &p.stats,
            PlanResult::Unsolvable(_, s) | PlanResult::Limit(_, _, s) => s,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanError {
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Expansion(#[from] ExpansionError),
    #[error("decoded solution failed validation: {0}")]
    Decode(String),
}

/// `|V|! / (|V| - n)!`, saturating at `cap + 1`.
pub fn configuration_count(vertices: usize, robots: usize, cap: usize) -> usize {
    let mut count: usize = 1;
    for k in 0..robots {
        if k >= vertices {
            return 0;
        }
        count = count.saturating_mul(vertices - k);
        if count > cap {
            return cap.saturating_add(1);
        }
    }
    count
}

struct Clock {
    start: Instant,
    limit: Option<Duration>,
}

impl Clock {
    fn remaining(&self) -> Option<Duration> {
        self.limit.map(|l| l.saturating_sub(self.start.elapsed()))
    }
}

struct Attempt {
    net: TimeExpandedNetwork,
    model: IlpModel,
    outcome: SolveOutcome,
}

fn attempt(
    instance: &MapfInstance,
    horizon: usize,
    config: &PlannerConfig,
    clock: &Clock,
    tompp: bool,
    warm: Option<&[bool]>,
    stats: &mut PlanStats,
) -> Result<Attempt, PlanError> {
    let started = Instant::now();
    let net = expand(instance, horizon, config.costs)?;
    let model = if tompp { build_tompp_model(&net, config.prune) } else { build_dompp_model(&net, config.prune) };
    let mut solver = config.solver.clone();
    solver.time_limit = clock.remaining();
    if tompp && config.require_full_flow {
        solver.cutoff = Some(instance.robot_count() as i64);
        // The objective is pinned, so a relaxation has nothing to bound.
        solver.lp_relaxation = false;
    }
    let (outcome, solve) = match &config.external {
        Some(ext) => (solve_external(&model, ext, &solver)?, SolveStats::default()),
        None => {
            if solver.time_limit == Some(Duration::ZERO) {
                (SolveOutcome::Limit(None, LimitReason::Time), SolveStats::default())
            } else {
                let report = solve_with(&model, &solver, warm)?;
                (report.outcome, report.stats)
            }
        }
    };
    let label = match &outcome {
        SolveOutcome::Optimal(_) => "optimal",
        SolveOutcome::Infeasible => "infeasible",
        SolveOutcome::Limit(..) => "limit",
    };
    info!("horizon {}: {} ({:?})", horizon, label, outcome.assignment().map(|a| a.objective));
    stats.horizons.push(HorizonStats {
        horizon,
        outcome: label,
        objective: outcome.assignment().map(|a| a.objective),
        variables: model.var_count(),
        free_variables: model.free_var_count(),
        rows: model.rows.len(),
        solve,
        elapsed: started.elapsed(),
    });
    Ok(Attempt { net, model, outcome })
}

fn decode(attempt: &Attempt, values: &[bool], objective: i64, mut stats: PlanStats, clock: &Clock) -> Result<Plan, PlanError> {
    let flow = attempt.model.assignment_to_flow(values).expect("network model");
    let solution = flow_to_paths(&attempt.net, &flow)?;
    let report = validate_solution(attempt.net.instance(), &solution).map_err(|e| PlanError::Decode(e.to_string()))?;
    if !report.is_valid() {
        return Err(PlanError::Decode(format!("{:?}", report.violations)));
    }
    stats.elapsed = clock.start.elapsed();
    Ok(Plan { solution, horizon: attempt.net.horizon(), objective, flow, stats })
}

/// Carries the routed robots of one horizon's assignment over to the next
/// horizon by waiting one more step at the goal.
fn pad_assignment(prev: &Attempt, values: &[bool], next_net: &TimeExpandedNetwork, next_model: &IlpModel) -> Option<Vec<bool>> {
    let flow = prev.model.assignment_to_flow(values)?;
    let mut per_robot = Vec::with_capacity(flow.robot_count());
    for i in prev.net.instance().robots() {
        match trace_robot(&prev.net, &flow, i) {
            Ok(mut path) => {
                path.push(*path.last().unwrap());
                per_robot.push(route_arcs(next_net, i, &path)?);
            }
            Err(_) => per_robot.push(Vec::new()),
        }
    }
    next_model.flow_to_assignment(&Flow::new(per_robot))
}

fn first_horizon(instance: &MapfInstance) -> Result<usize, Unsolvable> {
    match instance.shortest_lengths() {
        Ok(lengths) => Ok(lengths.into_iter().max().unwrap_or(0)),
        Err(robot) => Err(Unsolvable::Unreachable { robot }),
    }
}

/// Minimum-makespan planning: tries horizons upward from the longest
/// individual shortest path until every robot can be routed.
pub fn tompp(instance: &MapfInstance, config: &PlannerConfig) -> Result<PlanResult, PlanError> {
    let clock = Clock { start: Instant::now(), limit: config.solver.time_limit };
    let mut stats = PlanStats::default();
    let t0 = match first_horizon(instance) {
        Ok(t) => t,
        Err(u) => return Ok(PlanResult::Unsolvable(u, stats)),
    };
    let n = instance.robot_count() as i64;
    let configs = configuration_count(instance.graph.vertex_count(), instance.robot_count(), usize::MAX - 1);
    let mut previous: Option<(Attempt, Vec<bool>)> = None;
    let mut horizon = t0;
    loop {
        if horizon > configs {
            stats.elapsed = clock.start.elapsed();
            return Ok(PlanResult::Unsolvable(Unsolvable::ConfigurationBound { horizon: configs }, stats));
        }
        if config.t_max_override.is_some_and(|m| horizon > m) {
            stats.elapsed = clock.start.elapsed();
            return Ok(PlanResult::Limit(PlanLimit::Override { horizon }, None, stats));
        }
        if horizon > config.horizon_ceiling {
            stats.elapsed = clock.start.elapsed();
            return Ok(PlanResult::Limit(PlanLimit::Ceiling { horizon }, None, stats));
        }
        let warm = match (&previous, config.require_full_flow) {
            (Some((prev, values)), false) => {
                let net = expand(instance, horizon, config.costs)?;
                let model = build_tompp_model(&net, config.prune);
                pad_assignment(prev, values, &net, &model)
            }
            _ => None,
        };
        let result = attempt(instance, horizon, config, &clock, true, warm.as_deref(), &mut stats)?;
        match result.outcome.clone() {
            SolveOutcome::Optimal(a) | SolveOutcome::Limit(Some(a), _) if a.objective == n => {
                return Ok(PlanResult::Solved(decode(&result, &a.values, a.objective, stats, &clock)?));
            }
            SolveOutcome::Limit(_, reason) => {
                stats.elapsed = clock.start.elapsed();
                return Ok(PlanResult::Limit(PlanLimit::Solver { reason, horizon }, None, stats));
            }
            SolveOutcome::Optimal(a) => previous = Some((result, a.values)),
            SolveOutcome::Infeasible => previous = None,
        }
        horizon += 1;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomppMode {
    /// Distance-optimal over all horizons, found at `n` times the optimal
    /// makespan; among distance-optimal plans the shortest horizon is kept.
    Full,
    /// Distance-optimal among plans of exactly this horizon.
    FixedT(usize),
}

fn dompp_fixed(instance: &MapfInstance, horizon: usize, config: &PlannerConfig, clock: &Clock, mut stats: PlanStats) -> Result<PlanResult, PlanError> {
    let t0 = match first_horizon(instance) {
        Ok(t) => t,
        Err(u) => return Ok(PlanResult::Unsolvable(u, stats)),
    };
    if horizon < t0 {
        return Ok(PlanResult::Unsolvable(Unsolvable::AtHorizon { horizon }, stats));
    }
    let result = attempt(instance, horizon, config, clock, false, None, &mut stats)?;
    match result.outcome.clone() {
        SolveOutcome::Optimal(a) => Ok(PlanResult::Solved(decode(&result, &a.values, a.objective, stats, clock)?)),
        SolveOutcome::Infeasible => {
            stats.elapsed = clock.start.elapsed();
            Ok(PlanResult::Unsolvable(Unsolvable::AtHorizon { horizon }, stats))
        }
        SolveOutcome::Limit(best, reason) => {
            let best = match best {
                Some(a) => Some(decode(&result, &a.values, a.objective, PlanStats::default(), clock)?.solution),
                None => None,
            };
            stats.elapsed = clock.start.elapsed();
            Ok(PlanResult::Limit(PlanLimit::Solver { reason, horizon }, best, stats))
        }
    }
}

pub fn dompp(instance: &MapfInstance, mode: DomppMode, config: &PlannerConfig) -> Result<PlanResult, PlanError> {
    let clock = Clock { start: Instant::now(), limit: config.solver.time_limit };
    let horizon = match mode {
        DomppMode::FixedT(t) => return dompp_fixed(instance, t, config, &clock, PlanStats::default()),
        DomppMode::Full => match tompp(instance, config)? {
            PlanResult::Solved(plan) => plan.horizon,
            other => return Ok(other),
        },
    };
    let n = instance.robot_count().max(1);
    let full = horizon * n;
    if config.t_max_override.is_some_and(|m| full > m) || full > config.horizon_ceiling {
        return Ok(PlanResult::Limit(PlanLimit::Ceiling { horizon: full }, None, PlanStats::default()));
    }
    let best = dompp_fixed(instance, full, config, &clock, PlanStats::default())?;
    let PlanResult::Solved(mut best) = best else { return Ok(best) };
    if config.costs.stay_cost != 0 {
        // Every plan of a fixed horizon costs the same when waiting is charged.
        return Ok(PlanResult::Solved(best));
    }
    // The optimum can only fall as the horizon grows, so the shortest horizon
    // that still attains it is found by bisection.
    let (mut lo, mut hi) = (horizon, full);
    let mut stats = best.stats.clone();
    while lo < hi {
        let mid = (lo + hi) / 2;
        match dompp_fixed(instance, mid, config, &clock, stats.clone())? {
            PlanResult::Solved(plan) => {
                stats = plan.stats.clone();
                if plan.objective == best.objective {
                    best = plan;
                    hi = mid;
                } else {
                    lo = mid + 1;
                }
            }
            PlanResult::Unsolvable(_, s) => {
                stats = s;
                lo = mid + 1;
            }
            limit @ PlanResult::Limit(..) => return Ok(limit),
        }
    }
    if best.horizon != hi {
        if let PlanResult::Solved(plan) = dompp_fixed(instance, hi, config, &clock, stats.clone())? {
            best = plan;
        }
    }
    best.stats = stats;
    best.stats.elapsed = clock.start.elapsed();
    Ok(PlanResult::Solved(best))
}

/// Re-encodes a plan's raw flow through its decoded paths.
pub fn canonical_plan_flow(instance: &MapfInstance, plan: &Plan, costs: CostProfile) -> Result<Flow, PlanError> {
    let net = expand(instance, plan.horizon, costs)?;
    Ok(canonical_flow(&net, &plan.flow)?)
}
