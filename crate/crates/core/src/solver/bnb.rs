//! Depth-first branch and bound with row propagation and an optional LP
//! relaxation.
//!
//! Each search node keeps a warm-started simplex state. Variables fixed by
//! propagation are pushed into the LP lazily: only when the relaxation puts
//! them at the wrong value, which keeps the relaxation valid while saving
//! most re-solves. The LP runs in floating point; bounds are rounded to the
//! integer objective with a small tolerance and every integral point is
//! checked exactly against the model before it is accepted.
//!
//! When the model declares stage boundaries, a finished subtree whose
//! branching decisions all precede a boundary, and whose variables before it
//! are all fixed, is summarized by the partial activities of the rows that
//! cross the boundary. Any later node with the same summary and no easier
//! requirement on the remaining objective is pruned.

use std::collections::HashMap;
use std::sync::atomic::{AtomicBool, AtomicI64, AtomicU64, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use log::debug;
use microlp::{ComparisonOp, OptimizationDirection, Problem};
use rayon::prelude::*;

use super::propagate::{Propagator, UNFIXED};
use super::{Assignment, LimitReason, SolveOutcome, SolveReport, SolveStats, SolverConfig, SolverError};
use crate::ilp::{IlpModel, Relation, Sense};

const INTEGRALITY_TOL: f64 = 1e-6;
const BOUND_TOL: f64 = 1e-6;
const SYNC_TOL: f64 = 1e-9;

struct Shared<'a> {
    model: &'a IlpModel,
    maximize: bool,
    deadline: Option<Instant>,
    node_limit: Option<u64>,
    /// Objective every further assignment must reach (maximize) or stay
    /// under (minimize).
    required: AtomicI64,
    best: Mutex<Option<Assignment>>,
    nodes: AtomicU64,
    lp_solves: AtomicU64,
    max_depth: AtomicUsize,
    limit: Mutex<Option<LimitReason>>,
    stop: AtomicBool,
    lp_var: Vec<Option<microlp::Variable>>,
    lp_const: f64,
    /// Objective terms sorted by variable.
    objective: Vec<(usize, i64)>,
    /// Per stage boundary, the earlier-side terms of the rows crossing it.
    crossing: Vec<Vec<Vec<(usize, i64)>>>,
}

enum Stop {
    Limit(LimitReason),
    Numerical(String),
}

enum NodeResult {
    Prune,
    Integral(Assignment),
    Branch(Option<microlp::Solution>, usize),
}

impl<'a> Shared<'a> {
    fn required(&self) -> i64 {
        self.required.load(Ordering::SeqCst)
    }

    fn offer(&self, a: Assignment) {
        let mut best = self.best.lock().unwrap();
        let required = self.required();
        let meets = if self.maximize { a.objective >= required } else { a.objective <= required };
        if meets {
            let next = if self.maximize { a.objective + 1 } else { a.objective - 1 };
            if self.maximize {
                self.required.fetch_max(next, Ordering::SeqCst);
            } else {
                self.required.fetch_min(next, Ordering::SeqCst);
            }
            debug!("incumbent {}", a.objective);
            *best = Some(a);
        }
    }

    fn check_limits(&self) -> Result<(), Stop> {
        if self.stop.load(Ordering::Relaxed) {
            return Err(Stop::Limit(self.limit.lock().unwrap().unwrap_or(LimitReason::Time)));
        }
        let reason = if self.deadline.is_some_and(|d| Instant::now() >= d) {
            Some(LimitReason::Time)
        } else if self.node_limit.is_some_and(|l| self.nodes.load(Ordering::SeqCst) >= l) {
            Some(LimitReason::Nodes)
        } else {
            None
        };
        match reason {
            Some(r) => Err(self.raise(r)),
            None => Ok(()),
        }
    }

    fn raise(&self, reason: LimitReason) -> Stop {
        let mut limit = self.limit.lock().unwrap();
        if limit.is_none() {
            *limit = Some(reason);
        }
        self.stop.store(true, Ordering::SeqCst);
        Stop::Limit(limit.unwrap())
    }

    fn fix_lp(&self, lp: microlp::Solution, var: microlp::Variable, value: f64) -> Result<Option<microlp::Solution>, Stop> {
        self.lp_solves.fetch_add(1, Ordering::Relaxed);
        match lp.fix_var(var, value) {
            Ok(microlp::SolveOutcome::Solution(s)) => Ok(Some(s)),
            Ok(microlp::SolveOutcome::Interrupted(_)) => Err(self.raise(LimitReason::Time)),
            Err(microlp::Error::Infeasible) => Ok(None),
            Err(e) => Err(Stop::Numerical(e.to_string())),
        }
    }

    /// LP of a child node; `Ok(None)` when the child is LP-infeasible.
    fn child_lp(&self, lp: Option<microlp::Solution>, var: usize, value: bool) -> Result<Option<Option<microlp::Solution>>, Stop> {
        match lp {
            None => Ok(Some(None)),
            Some(lp) => Ok(self.fix_lp(lp, self.lp_var[var].unwrap(), f64::from(u8::from(value)))?.map(Some)),
        }
    }

    fn prunable(&self, lp_obj: f64) -> bool {
        let total = lp_obj + self.lp_const;
        let required = self.required();
        if self.maximize {
            ((total + BOUND_TOL).floor() as i64) < required
        } else {
            ((total - BOUND_TOL).ceil() as i64) > required
        }
    }
}

const CACHE_CAPACITY: usize = 1 << 21;

/// Cache key: boundary index and the partial activity, over variables before
/// the boundary, of each row crossing it. Everything after the boundary
/// sees the earlier variables only through these sums.
type CacheKey = (usize, Vec<i64>);

struct CacheEntry {
    key: CacheKey,
    /// Objective collected before the boundary.
    past: i64,
}

struct Worker<'s, 'a> {
    shared: &'s Shared<'a>,
    p: Propagator,
    required: i64,
    /// For each key, a requirement on the objective still to be collected
    /// after the boundary that is known to be unattainable.
    cache: HashMap<CacheKey, i64>,
}

impl<'s, 'a> Worker<'s, 'a> {
    fn sync_required(&mut self) {
        let r = self.shared.required();
        if r != self.required {
            self.required = r;
            if self.shared.maximize {
                self.p.set_objective_bounds(r, i64::MAX);
            } else {
                self.p.set_objective_bounds(i64::MIN, r);
            }
        }
    }

    /// Propagates the incumbent bound; false if the node is now dead.
    fn refresh(&mut self) -> bool {
        self.sync_required();
        self.p.touch_objective();
        self.p.propagate()
    }

    fn evaluate(&mut self, lp: Option<microlp::Solution>) -> Result<NodeResult, Stop> {
        let shared = self.shared;
        let model = shared.model;
        let Some(mut lp) = lp else {
            return Ok(match (0..model.variables.len()).find(|&v| self.p.value(v) == UNFIXED) {
                Some(v) => NodeResult::Branch(None, v),
                None => {
                    let values: Vec<bool> = self.p.values().iter().map(|&x| x == 1).collect();
                    match model.check(&values) {
                        Ok(objective) => NodeResult::Integral(Assignment { values, objective }),
                        Err(_) => NodeResult::Prune,
                    }
                }
            });
        };
        loop {
            let mut changed = false;
            for k in 0..self.p.trail_len() {
                let v = self.p.trail()[k];
                let Some(lv) = shared.lp_var[v] else { continue };
                let target = f64::from(self.p.value(v));
                if (lp.var_value_raw(lv) - target).abs() > SYNC_TOL {
                    match shared.fix_lp(lp, lv, target)? {
                        Some(next) => lp = next,
                        None => return Ok(NodeResult::Prune),
                    }
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        if shared.prunable(lp.objective()) {
            return Ok(NodeResult::Prune);
        }
        let mut branch = None;
        for (v, lv) in shared.lp_var.iter().enumerate() {
            let Some(lv) = lv else { continue };
            if self.p.value(v) != UNFIXED {
                continue;
            }
            let x = lp.var_value_raw(*lv);
            if (x - x.round()).abs() > INTEGRALITY_TOL {
                branch = Some(v);
                break;
            }
        }
        if let Some(v) = branch {
            return Ok(NodeResult::Branch(Some(lp), v));
        }
        let values: Vec<bool> = (0..model.variables.len())
            .map(|v| match self.p.value(v) {
                UNFIXED => shared.lp_var[v].is_some_and(|lv| lp.var_value_raw(lv) > 0.5),
                x => x == 1,
            })
            .collect();
        match model.check(&values) {
            Ok(objective) => Ok(NodeResult::Integral(Assignment { values, objective })),
            Err(_) => {
                // Rounding noise: fall back to the first undecided variable.
                match (0..model.variables.len()).find(|&v| self.p.value(v) == UNFIXED && shared.lp_var[v].is_some()) {
                    Some(v) => Ok(NodeResult::Branch(Some(lp), v)),
                    None => Ok(NodeResult::Prune),
                }
            }
        }
    }

    fn count_node(&self, depth: usize) -> Result<(), Stop> {
        self.shared.check_limits()?;
        self.shared.nodes.fetch_add(1, Ordering::SeqCst);
        self.shared.max_depth.fetch_max(depth, Ordering::Relaxed);
        Ok(())
    }

    /// Boundaries at which the current node may use the cache: everything
    /// before the boundary is fixed and no branching decision on the path
    /// lies past it.
    fn valid_boundaries(&self, prefix_max: Option<usize>) -> std::ops::Range<usize> {
        let stages = &self.shared.model.stages;
        let lo = match prefix_max {
            Some(m) => stages.partition_point(|&b| b <= m),
            None => 0,
        };
        let hi = self.p.completed_stages().min(stages.len());
        lo..hi.max(lo)
    }

    fn cache_entries(&self, prefix_max: Option<usize>) -> Vec<CacheEntry> {
        let shared = self.shared;
        self.valid_boundaries(prefix_max)
            .map(|i| {
                let bound = shared.model.stages[i];
                let activity = shared.crossing[i]
                    .iter()
                    .map(|terms| terms.iter().filter(|&&(v, _)| self.p.value(v) == 1).map(|&(_, c)| c).sum())
                    .collect();
                let end = shared.objective.partition_point(|&(v, _)| v < bound);
                let past = shared.objective[..end].iter().filter(|&&(v, _)| self.p.value(v) == 1).map(|&(_, c)| c).sum();
                CacheEntry { key: (i, activity), past }
            })
            .collect()
    }

    fn future_required(&self, past: i64) -> i64 {
        self.shared.required().saturating_sub(past)
    }

    fn cached_prune(&self, entries: &[CacheEntry]) -> bool {
        entries.iter().any(|e| match self.cache.get(&e.key) {
            Some(&s) => {
                let r = self.future_required(e.past);
                if self.shared.maximize {
                    r >= s
                } else {
                    r <= s
                }
            }
            None => false,
        })
    }

    /// Records that no completion of the finished subtree reaches the current
    /// requirement.
    fn record(&mut self, entries: Vec<CacheEntry>) {
        if self.cache.len() >= CACHE_CAPACITY {
            self.cache.clear();
        }
        for e in entries {
            let s = self.future_required(e.past);
            let maximize = self.shared.maximize;
            self.cache
                .entry(e.key)
                .and_modify(|old| *old = if maximize { (*old).min(s) } else { (*old).max(s) })
                .or_insert(s);
        }
    }

    /// Exhaustive depth-first search below `lp`, whose propagation state is
    /// the worker's current state.
    fn dfs(&mut self, lp: Option<microlp::Solution>, prefix_max: Option<usize>) -> Result<(), Stop> {
        struct Frame {
            mark: usize,
            var: usize,
            lp: Option<Option<microlp::Solution>>,
            tried_zero: bool,
            prefix_max: Option<usize>,
            entries: Vec<CacheEntry>,
        }
        let base = self.p.trail_len();
        let mut stack: Vec<Frame> = Vec::new();
        let mut current = if self.refresh() { Some((lp, prefix_max)) } else { None };
        'search: loop {
            if let Some((lp, prefix_max)) = current.take() {
                self.count_node(stack.len())?;
                let entries = self.cache_entries(prefix_max);
                if !self.cached_prune(&entries) {
                    match self.evaluate(lp)? {
                        NodeResult::Prune => self.record(entries),
                        NodeResult::Integral(a) => {
                            self.shared.offer(a);
                            self.sync_required();
                            self.record(entries);
                        }
                        NodeResult::Branch(lp, var) => {
                            let mark = self.p.trail_len();
                            stack.push(Frame { mark, var, lp: Some(lp.clone()), tried_zero: false, prefix_max, entries });
                            let child_max = Some(prefix_max.map_or(var, |m| m.max(var)));
                            if self.p.fix(var, true) && self.refresh() {
                                if let Some(next) = self.shared.child_lp(lp, var, true)? {
                                    current = Some((next, child_max));
                                    continue 'search;
                                }
                            }
                        }
                    }
                }
            }
            loop {
                let Some(frame) = stack.last_mut() else { break 'search };
                self.p.undo_to(frame.mark);
                if !frame.tried_zero {
                    frame.tried_zero = true;
                    let (var, lp) = (frame.var, frame.lp.take().unwrap());
                    let child_max = Some(frame.prefix_max.map_or(var, |m| m.max(var)));
                    if self.p.fix(var, false) && self.refresh() {
                        if let Some(next) = self.shared.child_lp(lp, var, false)? {
                            current = Some((next, child_max));
                            continue 'search;
                        }
                    }
                    continue;
                }
                let frame = stack.pop().unwrap();
                self.sync_required();
                self.record(frame.entries);
            }
        }
        self.p.undo_to(base);
        Ok(())
    }
}

/// A node of the initial split, described by its branching decisions.
struct Subproblem {
    decisions: Vec<(usize, bool)>,
    lp: Option<microlp::Solution>,
}

pub(super) fn run(model: &IlpModel, config: &SolverConfig, incumbent: Option<&[bool]>) -> Result<SolveReport, SolverError> {
    let start = Instant::now();
    let maximize = model.sense == Sense::Maximize;
    let mut required = match (maximize, config.cutoff) {
        (true, c) => c.unwrap_or(i64::MIN),
        (false, c) => c.unwrap_or(i64::MAX),
    };
    let mut best = None;
    if let Some(values) = incumbent {
        if let Ok(objective) = model.check(values) {
            let meets = if maximize { objective >= required } else { objective <= required };
            if meets {
                required = if maximize { objective + 1 } else { objective - 1 };
                best = Some(Assignment { values: values.to_vec(), objective });
            }
        }
    }

    let mut p = Propagator::new(model);
    let finish = |best: Option<Assignment>, limit: Option<LimitReason>, stats: SolveStats| {
        let outcome = match (best, limit) {
            (b, Some(r)) => SolveOutcome::Limit(b, r),
            (Some(b), None) => SolveOutcome::Optimal(b),
            (None, None) => SolveOutcome::Infeasible,
        };
        SolveReport { outcome, stats: SolveStats { elapsed: start.elapsed(), ..stats } }
    };

    let mut root_ok = p.enqueue_all_and_propagate();
    for (v, var) in model.variables.iter().enumerate() {
        if let Some(f) = var.fixed {
            root_ok = root_ok && p.fix(v, f);
        }
    }
    if maximize {
        p.set_objective_bounds(required, i64::MAX);
    } else {
        p.set_objective_bounds(i64::MIN, required);
    }
    root_ok = root_ok && p.propagate();
    if !root_ok {
        return Ok(finish(best, None, SolveStats::default()));
    }

    let (problem, lp_var, lp_const) = if config.lp_relaxation {
        let (mut problem, lp_var, lp_const) = build_lp(model, &p, maximize);
        if let Some(limit) = config.time_limit {
            problem.set_time_limit(limit);
        }
        (Some(problem), lp_var, lp_const)
    } else {
        (None, vec![None; model.variables.len()], 0.0)
    };
    let shared = Shared {
        model,
        maximize,
        deadline: config.time_limit.map(|l| start + l),
        node_limit: config.node_limit,
        required: AtomicI64::new(required),
        best: Mutex::new(best),
        nodes: AtomicU64::new(0),
        lp_solves: AtomicU64::new(u64::from(problem.is_some())),
        max_depth: AtomicUsize::new(0),
        limit: Mutex::new(None),
        stop: AtomicBool::new(false),
        lp_var,
        lp_const,
        objective: {
            let mut o = model.objective.clone();
            o.sort_unstable();
            o
        },
        crossing: crossing_rows(model, &p),
    };
    let stats = |s: &Shared| SolveStats {
        nodes: s.nodes.load(Ordering::SeqCst),
        lp_solves: s.lp_solves.load(Ordering::SeqCst),
        max_depth: s.max_depth.load(Ordering::SeqCst),
        elapsed: Duration::ZERO,
    };

    let root_lp = match problem.map(|pr| pr.solve()) {
        None => None,
        Some(Ok(microlp::SolveOutcome::Solution(s))) => Some(s),
        Some(Ok(microlp::SolveOutcome::Interrupted(_))) => {
            let b = shared.best.lock().unwrap().take();
            return Ok(finish(b, Some(LimitReason::Time), stats(&shared)));
        }
        Some(Err(microlp::Error::Infeasible)) => {
            let b = shared.best.lock().unwrap().take();
            return Ok(finish(b, None, stats(&shared)));
        }
        Some(Err(e)) => return Err(SolverError::Numerical(e.to_string())),
    };

    let result = if config.threads <= 1 {
        let mut worker = Worker { shared: &shared, p, required, cache: HashMap::new() };
        worker.dfs(root_lp, None)
    } else {
        run_parallel(&shared, p, required, root_lp, config.threads)
    };
    let limit = match result {
        Ok(()) => None,
        Err(Stop::Limit(r)) => Some(r),
        Err(Stop::Numerical(msg)) => return Err(SolverError::Numerical(msg)),
    };
    let st = stats(&shared);
    let b = shared.best.lock().unwrap().take();
    Ok(finish(b, limit, st))
}

fn run_parallel(shared: &Shared, p: Propagator, required: i64, root_lp: Option<microlp::Solution>, threads: usize) -> Result<(), Stop> {
    // Breadth-first split until there is enough work to share.
    let mut worker = Worker { shared, p, required, cache: HashMap::new() };
    let root_mark = worker.p.trail_len();
    let mut frontier = vec![Subproblem { decisions: Vec::new(), lp: root_lp }];
    let mut open = Vec::new();
    while let Some(sub) = frontier.pop() {
        if open.len() + frontier.len() >= 4 * threads {
            open.push(sub);
            continue;
        }
        let ok = sub.decisions.iter().all(|&(v, val)| worker.p.fix(v, val)) && worker.refresh();
        if ok {
            worker.count_node(sub.decisions.len())?;
            match worker.evaluate(sub.lp)? {
                NodeResult::Prune => {}
                NodeResult::Integral(a) => shared.offer(a),
                NodeResult::Branch(lp, var) => {
                    for val in [false, true] {
                        if let Some(child) = shared.child_lp(lp.clone(), var, val)? {
                            let mut decisions = sub.decisions.clone();
                            decisions.push((var, val));
                            frontier.push(Subproblem { decisions, lp: child });
                        }
                    }
                }
            }
        }
        worker.p.undo_to(root_mark);
    }
    let base = worker.p;
    let results: Vec<Result<(), Stop>> = open
        .into_par_iter()
        .map(|sub| {
            let mut w = Worker { shared, p: base.clone(), required, cache: HashMap::new() };
            if sub.decisions.iter().all(|&(v, val)| w.p.fix(v, val)) {
                w.dfs(sub.lp, sub.decisions.iter().map(|&(v, _)| v).max())
            } else {
                Ok(())
            }
        })
        .collect();
    results.into_iter().collect()
}

/// For each stage boundary, the earlier-side terms of every row with
/// undecided variables on both sides. Variables fixed at the root are
/// constants and are left out.
fn crossing_rows(model: &IlpModel, p: &Propagator) -> Vec<Vec<Vec<(usize, i64)>>> {
    let stages = &model.stages;
    let mut crossing = vec![Vec::new(); stages.len()];
    for row in &model.rows {
        let mut free: Vec<(usize, i64)> = row.terms.iter().copied().filter(|&(v, _)| p.value(v) == UNFIXED).collect();
        if free.len() < 2 {
            continue;
        }
        free.sort_unstable();
        let first = stages.partition_point(|&b| b <= free[0].0);
        let last = stages.partition_point(|&b| b <= free[free.len() - 1].0);
        for (i, list) in crossing.iter_mut().enumerate().take(last).skip(first) {
            let end = free.partition_point(|&(v, _)| v < stages[i]);
            list.push(free[..end].to_vec());
        }
    }
    crossing
}

/// LP relaxation over the variables left free after root propagation.
fn build_lp(model: &IlpModel, p: &Propagator, maximize: bool) -> (Problem, Vec<Option<microlp::Variable>>, f64) {
    let direction = if maximize { OptimizationDirection::Maximize } else { OptimizationDirection::Minimize };
    let mut problem = Problem::new(direction);
    let mut obj = vec![0i64; model.variables.len()];
    for &(v, c) in &model.objective {
        obj[v] = c;
    }
    let mut lp_const = 0.0;
    let mut lp_var = vec![None; model.variables.len()];
    for v in 0..model.variables.len() {
        match p.value(v) {
            UNFIXED => lp_var[v] = Some(problem.add_var(obj[v] as f64, (0.0, 1.0))),
            1 => lp_const += obj[v] as f64,
            _ => {}
        }
    }
    for row in &model.rows {
        let mut rhs = row.rhs;
        let mut terms = Vec::with_capacity(row.terms.len());
        for &(v, c) in &row.terms {
            match lp_var[v] {
                Some(lv) => terms.push((lv, c as f64)),
                None => rhs -= c * i64::from(p.value(v)),
            }
        }
        if terms.is_empty() {
            continue;
        }
        let op = match row.relation {
            Relation::Le => ComparisonOp::Le,
            Relation::Eq => ComparisonOp::Eq,
            Relation::Ge => ComparisonOp::Ge,
        };
        problem.add_constraint(terms, op, rhs as f64);
    }
    (problem, lp_var, lp_const)
}
