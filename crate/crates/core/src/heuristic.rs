//! Fast, non-optimal planning: follow individual shortest paths and repair
//! stalls by solving small time-optimal problems around them.
//!
//! Robots advance along their paths in lockstep. A robot waits when its
//! next vertex stays occupied or would be swapped head-on. When a robot has
//! waited too long, or nobody can move, the vertices around it and its
//! blocker form a repair region; the robots inside it get local goals and
//! the region is solved with [`tompp`]. Stalling again at the same spot
//! widens the region.
//! A region covering the whole graph is solved as the full instance.

use std::cmp::Reverse;
use std::collections::{BTreeSet, VecDeque};
use std::time::{Duration, Instant};

use crate::graph::{DiagonalPair, Graph, MapfInstance, RobotId, Solution, Variant, VertexId};
use crate::planner::{tompp, PlanError, PlanResult, PlannerConfig, Unsolvable};

#[derive(Debug, Clone)]
pub struct RepairConfig {
    pub radius: usize,
    pub growth: usize,
    /// Time limit of each repair solve.
    pub window_time_limit: Duration,
    /// Steps a robot may be held back before its surroundings are repaired.
    pub patience: usize,
    /// Simulation steps plus repairs.
    pub iteration_cap: usize,
    pub time_limit: Option<Duration>,
}

impl Default for RepairConfig {
    fn default() -> Self {
        RepairConfig { radius: 2, growth: 1, window_time_limit: Duration::from_secs(10), patience: 2, iteration_cap: 100_000, time_limit: None }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepairRecord {
    pub radius: usize,
    pub region_size: usize,
    pub robots: usize,
    /// Makespan of the local plan, when one was found.
    pub local_horizon: Option<usize>,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RepairOutcome {
    Solved(Solution),
    Unsolvable(Unsolvable),
    /// The paths executed so far.
    Limit(Solution),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepairReport {
    pub outcome: RepairOutcome,
    pub repairs: Vec<RepairRecord>,
    pub iterations: usize,
    pub elapsed: Duration,
}

impl RepairReport {
    pub fn solution(&self) -> Option<&Solution> {
        match &self.outcome {
            RepairOutcome::Solved(s) => Some(s),
            _ => None,
        }
    }
}

/// Shortest path from `from` to `to`, stepping to the smallest-numbered
/// vertex whenever several neighbours are equally close.
fn shortest_path(graph: &Graph, from: VertexId, to: VertexId) -> Option<Vec<VertexId>> {
    let dist = graph.bfs_distances(to);
    let mut d = dist[from]?;
    let mut path = vec![from];
    let mut v = from;
    while d > 0 {
        v = *graph.neighbors(v).iter().filter(|&&u| dist[u] == Some(d - 1)).min().expect("BFS predecessor exists");
        path.push(v);
        d -= 1;
    }
    Some(path)
}

/// Each robot's shortest path, ignoring the others. `Err` names the first
/// robot whose goal is unreachable.
pub fn decoupled_paths(instance: &MapfInstance) -> Result<Vec<Vec<VertexId>>, RobotId> {
    instance.robots().map(|i| shortest_path(&instance.graph, instance.start(i), instance.goal(i)).ok_or(i)).collect()
}

/// Sum of individual shortest path lengths: a lower bound on total distance.
pub fn disjoint_distance(instance: &MapfInstance) -> Result<usize, RobotId> {
    Ok(decoupled_paths(instance)?.iter().map(|p| p.len() - 1).sum())
}

struct Run<'a> {
    instance: &'a MapfInstance,
    pos: Vec<VertexId>,
    history: Vec<Vec<VertexId>>,
    /// Vertices still to visit, excluding the current one.
    plan: Vec<VecDeque<VertexId>>,
    /// Consecutive steps each robot has been held back.
    waited: Vec<usize>,
}

impl<'a> Run<'a> {
    fn replan(&mut self) {
        let g = &self.instance.graph;
        for r in 0..self.pos.len() {
            let path = shortest_path(g, self.pos[r], self.instance.goals()[r]).expect("goal reachable from the start component");
            self.plan[r] = path.into_iter().skip(1).collect();
        }
    }

    fn record_step(&mut self) {
        for (h, &p) in self.history.iter_mut().zip(&self.pos) {
            h.push(p);
        }
    }

    fn solution(&self) -> Solution {
        Solution::new(self.history.clone()).expect("equal lengths")
    }

    /// Advances every robot that can move safely. False when nobody moves.
    fn step(&mut self) -> bool {
        let n = self.pos.len();
        let mut occupant = vec![None; self.instance.graph.vertex_count()];
        for (r, &p) in self.pos.iter().enumerate() {
            occupant[p] = Some(r);
        }
        let target: Vec<Option<VertexId>> = self.plan.iter().map(|p| p.front().copied()).collect();
        let mut moving: Vec<bool> = target.iter().map(Option::is_some).collect();
        let head_on_forbidden = self.instance.variant != Variant::AllowHeadOn;
        let diagonals = self.instance.variant.diagonals();
        loop {
            let mut changed = false;
            for r in 0..n {
                if !moving[r] {
                    continue;
                }
                let v = target[r].unwrap();
                let blocked = match occupant[v] {
                    Some(s) => !moving[s] || (head_on_forbidden && target[s] == Some(self.pos[r])),
                    None => false,
                };
                let contested = (0..r).any(|q| moving[q] && target[q] == Some(v));
                let crossing = (0..r).any(|q| moving[q] && crosses(diagonals, (self.pos[q], target[q].unwrap()), (self.pos[r], v)));
                if blocked || contested || crossing {
                    moving[r] = false;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        for r in 0..n {
            self.waited[r] = if target[r].is_some() && !moving[r] { self.waited[r] + 1 } else { 0 };
        }
        if !moving.iter().any(|&m| m) {
            return false;
        }
        for ((p, plan), _) in self.pos.iter_mut().zip(&mut self.plan).zip(&moving).filter(|(_, &m)| m) {
            *p = plan.pop_front().unwrap();
        }
        self.record_step();
        true
    }
}

/// Whether two moves use the two diagonals of one square.
fn crosses(pairs: &[DiagonalPair], a: (VertexId, VertexId), b: (VertexId, VertexId)) -> bool {
    pairs.iter().any(|p| matches!((p.diagonal_of(a.0, a.1), p.diagonal_of(b.0, b.1)), (Some(x), Some(y)) if x != y))
}

/// Vertices within `radius` of any seed.
fn ball(graph: &Graph, seeds: &BTreeSet<VertexId>, radius: usize) -> BTreeSet<VertexId> {
    let mut dist = vec![usize::MAX; graph.vertex_count()];
    let mut queue = VecDeque::new();
    for &s in seeds {
        dist[s] = 0;
        queue.push_back(s);
    }
    while let Some(v) = queue.pop_front() {
        if dist[v] == radius {
            continue;
        }
        for &u in graph.neighbors(v) {
            if dist[u] == usize::MAX {
                dist[u] = dist[v] + 1;
                queue.push_back(u);
            }
        }
    }
    (0..graph.vertex_count()).filter(|&v| dist[v] != usize::MAX).collect()
}

/// Robots inside `region` with local start and goal vertices in global ids.
fn local_goals(run: &Run, region: &BTreeSet<VertexId>) -> Vec<(usize, VertexId, VertexId)> {
    let g = &run.instance.graph;
    let members: Vec<usize> = (0..run.pos.len()).filter(|&r| region.contains(&run.pos[r])).collect();
    let mut taken = BTreeSet::new();
    let mut goal = vec![None; run.pos.len()];
    // Robots with nothing left to do keep their vertex.
    for &r in &members {
        if run.plan[r].is_empty() {
            goal[r] = Some(run.pos[r]);
            taken.insert(run.pos[r]);
        }
    }
    let (sub, map) = g.induced(&region.iter().copied().collect::<Vec<_>>());
    let component = sub.components();
    let local = |v: VertexId| map.binary_search(&v).expect("vertex in region");
    for &r in &members {
        if goal[r].is_some() {
            continue;
        }
        let furthest = run.plan[r].iter().take_while(|v| region.contains(v)).last().copied().unwrap_or(run.pos[r]);
        let choice = if !taken.contains(&furthest) {
            furthest
        } else {
            let to_goal = g.bfs_distances(run.instance.goals()[r]);
            let home = component[local(run.pos[r])];
            *region
                .iter()
                .filter(|&&v| !taken.contains(&v) && component[local(v)] == home)
                .min_by_key(|&&v| (to_goal[v].unwrap_or(usize::MAX), v))
                .expect("the robot's own vertex is free")
        };
        taken.insert(choice);
        goal[r] = Some(choice);
    }
    members.into_iter().map(|r| (r, run.pos[r], goal[r].unwrap())).collect()
}

fn restrict_variant(variant: &Variant, map: &[VertexId]) -> Variant {
    match variant {
        Variant::GridDiagonal(pairs) => {
            let local = |v: VertexId| map.binary_search(&v).ok();
            let kept = pairs
                .iter()
                .filter_map(|p| {
                    let [a, b, c, d] = p.vertices().map(local);
                    Some(DiagonalPair { first: (a?, b?), second: (c?, d?) })
                })
                .collect();
            Variant::GridDiagonal(kept)
        }
        other => other.clone(),
    }
}

fn remaining(start: Instant, limit: Option<Duration>) -> Option<Duration> {
    limit.map(|l| l.saturating_sub(start.elapsed()))
}

pub fn local_repair_solve(instance: &MapfInstance, config: &RepairConfig) -> Result<RepairReport, PlanError> {
    let start = Instant::now();
    let finish = |outcome, repairs, iterations| RepairReport { outcome, repairs, iterations, elapsed: start.elapsed() };
    let paths = match decoupled_paths(instance) {
        Ok(p) => p,
        Err(robot) => return Ok(finish(RepairOutcome::Unsolvable(Unsolvable::Unreachable { robot }), Vec::new(), 0)),
    };
    let mut run = Run {
        instance,
        pos: instance.starts().to_vec(),
        history: instance.starts().iter().map(|&s| vec![s]).collect(),
        plan: paths.into_iter().map(|p| p.into_iter().skip(1).collect()).collect(),
        waited: vec![0; instance.robot_count()],
    };
    let mut repairs = Vec::new();
    let mut radius = config.radius.max(1);
    let mut last_stall: Option<(usize, VertexId, VertexId)> = None;
    let mut iterations = 0;
    loop {
        if run.plan.iter().all(VecDeque::is_empty) {
            return Ok(finish(RepairOutcome::Solved(run.solution()), repairs, iterations));
        }
        iterations += 1;
        if iterations > config.iteration_cap || remaining(start, config.time_limit) == Some(Duration::ZERO) {
            return Ok(finish(RepairOutcome::Limit(run.solution()), repairs, iterations));
        }
        let progressed = run.step();
        let waiting = (0..run.pos.len()).filter(|&r| !run.plan[r].is_empty());
        let focus = if progressed {
            match waiting.filter(|&r| run.waited[r] >= config.patience).max_by_key(|&r| (run.waited[r], Reverse(r))) {
                Some(r) => r,
                None => continue,
            }
        } else {
            waiting.max_by_key(|&r| (run.waited[r], Reverse(r))).expect("an unfinished robot")
        };

        // The focus robot, where it wants to go, and where its blocker wants to go.
        let next = run.plan[focus][0];
        let key = (focus, run.pos[focus], next);
        if last_stall == Some(key) {
            radius += config.growth.max(1);
        } else {
            radius = config.radius.max(1);
        }
        last_stall = Some(key);
        let mut seeds = BTreeSet::from([run.pos[focus], next]);
        if let Some(s) = run.pos.iter().position(|&p| p == next) {
            seeds.extend(run.plan[s].front());
        }
        let region = ball(&instance.graph, &seeds, radius);
        let window = Instant::now();

        if region.len() == instance.graph.vertex_count() {
            // The whole graph: solve what is left exactly.
            let rest = MapfInstance::new(instance.graph.clone(), run.pos.clone(), instance.goals().to_vec(), instance.variant.clone())
                .expect("positions are distinct");
            let mut cfg = PlannerConfig::default();
            cfg.solver.time_limit = remaining(start, config.time_limit);
            let result = tompp(&rest, &cfg)?;
            repairs.push(RepairRecord {
                radius,
                region_size: region.len(),
                robots: run.pos.len(),
                local_horizon: result.plan().map(|p| p.horizon),
                elapsed: window.elapsed(),
            });
            return Ok(match result {
                PlanResult::Solved(plan) => {
                    for t in 1..=plan.solution.horizon() {
                        run.pos = plan.solution.configuration(t);
                        run.record_step();
                    }
                    finish(RepairOutcome::Solved(run.solution()), repairs, iterations)
                }
                PlanResult::Unsolvable(u, _) => finish(RepairOutcome::Unsolvable(u), repairs, iterations),
                PlanResult::Limit(..) => finish(RepairOutcome::Limit(run.solution()), repairs, iterations),
            });
        }

        let members = local_goals(&run, &region);
        let vertices: Vec<VertexId> = region.iter().copied().collect();
        let (sub, map) = instance.graph.induced(&vertices);
        let local = |v: VertexId| map.binary_search(&v).expect("vertex in region");
        let sub_instance = MapfInstance::new(
            sub,
            members.iter().map(|&(_, s, _)| local(s)).collect(),
            members.iter().map(|&(_, _, g)| local(g)).collect(),
            restrict_variant(&instance.variant, &map),
        )
        .expect("local starts and goals are distinct");
        let mut cfg = PlannerConfig::default();
        let budget = remaining(start, config.time_limit).map_or(config.window_time_limit, |r| r.min(config.window_time_limit));
        cfg.solver.time_limit = Some(budget);
        let t0 = sub_instance.shortest_lengths().map(|l| l.into_iter().max().unwrap_or(0)).unwrap_or(0);
        cfg.t_max_override = Some(t0 + region.len());
        let result = tompp(&sub_instance, &cfg)?;
        let plan = result.plan();
        repairs.push(RepairRecord {
            radius,
            region_size: region.len(),
            robots: members.len(),
            local_horizon: plan.map(|p| p.solution.makespan()),
            elapsed: window.elapsed(),
        });
        if let Some(plan) = plan {
            let sol = plan.solution.trimmed();
            for t in 1..=sol.horizon() {
                for (k, &(r, _, _)) in members.iter().enumerate() {
                    run.pos[r] = map[sol.path(k + 1)[t]];
                }
                run.record_step();
            }
            run.replan();
            for &(r, _, _) in &members {
                run.waited[r] = 0;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::validate_solution;

    fn line(len: usize) -> Graph {
        Graph::new(len + 1, (0..len).map(|i| (i, i + 1))).unwrap()
    }

    #[test]
    fn ties_go_to_smaller_vertex() {
        // Square 0-1-3-2-0: from 0 to 3 both 1 and 2 are on shortest paths.
        let g = Graph::new(4, [(0, 1), (1, 3), (0, 2), (2, 3)]).unwrap();
        let inst = MapfInstance::new(g, vec![0], vec![3], Variant::ForbidHeadOn).unwrap();
        assert_eq!(decoupled_paths(&inst).unwrap(), vec![vec![0, 1, 3]]);
        assert_eq!(disjoint_distance(&inst).unwrap(), 2);
    }

    #[test]
    fn conflict_free_needs_no_repair() {
        let g = line(6);
        let inst = MapfInstance::new(g, vec![0, 3], vec![2, 6], Variant::ForbidHeadOn).unwrap();
        let report = local_repair_solve(&inst, &RepairConfig::default()).unwrap();
        assert!(report.repairs.is_empty());
        let sol = report.solution().unwrap();
        assert_eq!(sol.makespan(), 3);
        assert!(validate_solution(&inst, sol).unwrap().is_valid());
    }

    #[test]
    fn following_robots_move_together() {
        let inst = MapfInstance::new(line(4), vec![1, 0], vec![4, 3], Variant::ForbidHeadOn).unwrap();
        let report = local_repair_solve(&inst, &RepairConfig::default()).unwrap();
        assert_eq!(report.solution().unwrap().makespan(), 3);
    }

    #[test]
    fn unreachable_is_reported() {
        let g = Graph::new(3, [(0, 1)]).unwrap();
        let inst = MapfInstance::new(g, vec![0], vec![2], Variant::ForbidHeadOn).unwrap();
        let report = local_repair_solve(&inst, &RepairConfig::default()).unwrap();
        assert_eq!(report.outcome, RepairOutcome::Unsolvable(Unsolvable::Unreachable { robot: 1 }));
    }
}
