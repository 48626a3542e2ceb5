//! Graphs, MAPF instances, solutions and the reference solution validator.
//!
//! Vertices are dense indices `0..vertex_count`. Robots are numbered `1..=n`
//! everywhere in the public API; internally the per-robot vectors are indexed
//! by `robot - 1`.

use std::collections::{BTreeSet, HashMap, VecDeque};

use thiserror::Error;

pub type VertexId = usize;

/// 1-based robot index.
pub type RobotId = usize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("graph has no vertices")]
    Empty,
    #[error("self-loop on vertex {0}")]
    SelfLoop(VertexId),
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(VertexId, VertexId),
    #[error("vertex {vertex} out of range (graph has {count} vertices)")]
    VertexOutOfRange { vertex: VertexId, count: usize },
    #[error("cell ({x}, {y}) lies outside a {width}x{height} grid")]
    CellOutOfRange { x: usize, y: usize, width: usize, height: usize },
    #[error("no path from vertex {from} to vertex {to}")]
    Unreachable { from: VertexId, to: VertexId },
    #[error("{0} coordinate labels supplied for {1} vertices")]
    LabelCount(usize, usize),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InstanceError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("{starts} starts but {goals} goals")]
    RobotCountMismatch { starts: usize, goals: usize },
    #[error("robots {0} and {1} share the {2} vertex {3}")]
    NotInjective(RobotId, RobotId, &'static str, VertexId),
    #[error("diagonal pair references missing vertex {0}")]
    DiagonalVertex(VertexId),
}

/// Simple undirected graph with optional integer coordinate labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    vertex_count: usize,
    /// Normalized `(min, max)` pairs in insertion order.
    edges: Vec<(VertexId, VertexId)>,
    adjacency: Vec<Vec<VertexId>>,
    coords: Option<Vec<(i64, i64)>>,
}

impl Graph {
    pub fn new(vertex_count: usize, edges: impl IntoIterator<Item = (VertexId, VertexId)>) -> Result<Self, GraphError> {
        let mut seen = BTreeSet::new();
        let mut list = Vec::new();
        for (a, b) in edges {
            for v in [a, b] {
                if v >= vertex_count {
                    return Err(GraphError::VertexOutOfRange { vertex: v, count: vertex_count });
                }
            }
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            let key = (a.min(b), a.max(b));
            if !seen.insert(key) {
                return Err(GraphError::DuplicateEdge(key.0, key.1));
            }
            list.push(key);
        }
        let mut g = Graph { vertex_count, edges: list, adjacency: Vec::new(), coords: None };
        g.rebuild_adjacency();
        Ok(g)
    }

    pub fn with_coords(mut self, coords: Vec<(i64, i64)>) -> Result<Self, GraphError> {
        if coords.len() != self.vertex_count {
            return Err(GraphError::LabelCount(coords.len(), self.vertex_count));
        }
        self.coords = Some(coords);
        Ok(self)
    }

    fn rebuild_adjacency(&mut self) {
        let mut adjacency = vec![Vec::new(); self.vertex_count];
        for &(a, b) in &self.edges {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        self.adjacency = adjacency;
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(VertexId, VertexId)] {
        &self.edges
    }

    /// Neighbors in increasing id order.
    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.adjacency[v]
    }

    pub fn has_edge(&self, a: VertexId, b: VertexId) -> bool {
        a < self.vertex_count && self.adjacency[a].binary_search(&b).is_ok()
    }

    pub fn coords(&self) -> Option<&[(i64, i64)]> {
        self.coords.as_deref()
    }

    pub fn coord(&self, v: VertexId) -> Option<(i64, i64)> {
        self.coords.as_ref().map(|c| c[v])
    }

    pub fn vertex_at(&self, x: i64, y: i64) -> Option<VertexId> {
        self.coords.as_ref()?.iter().position(|&c| c == (x, y))
    }

    pub fn contains(&self, v: VertexId) -> bool {
        v < self.vertex_count
    }

    fn check_vertex(&self, v: VertexId) -> Result<(), GraphError> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(GraphError::VertexOutOfRange { vertex: v, count: self.vertex_count })
        }
    }

    /// BFS edge-count distances from `source`; `None` marks unreachable vertices.
    pub fn bfs_distances(&self, source: VertexId) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.vertex_count];
        let mut queue = VecDeque::new();
        dist[source] = Some(0);
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            let d = dist[u].unwrap();
            for &w in &self.adjacency[u] {
                if dist[w].is_none() {
                    dist[w] = Some(d + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Component label per vertex, numbered in order of smallest member.
    pub fn components(&self) -> Vec<usize> {
        let mut label = vec![usize::MAX; self.vertex_count];
        let mut next = 0;
        for s in 0..self.vertex_count {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = next;
            let mut stack = vec![s];
            while let Some(u) = stack.pop() {
                for &w in &self.adjacency[u] {
                    if label[w] == usize::MAX {
                        label[w] = next;
                        stack.push(w);
                    }
                }
            }
            next += 1;
        }
        label
    }

    pub fn is_connected(&self) -> bool {
        self.vertex_count > 0 && self.components().iter().all(|&c| c == 0)
    }

    /// Induced subgraph on `vertices` (kept in the given order). Returns the
    /// subgraph and the map from new ids to original ids.
    pub fn induced(&self, vertices: &[VertexId]) -> (Graph, Vec<VertexId>) {
        let index: HashMap<VertexId, usize> = vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut edges = Vec::new();
        for &(a, b) in &self.edges {
            if let (Some(&ia), Some(&ib)) = (index.get(&a), index.get(&b)) {
                edges.push((ia, ib));
            }
        }
        let mut g = Graph::new(vertices.len(), edges).expect("induced subgraph of a simple graph is simple");
        if let Some(c) = &self.coords {
            g.coords = Some(vertices.iter().map(|&v| c[v]).collect());
        }
        (g, vertices.to_vec())
    }
}

/// 4-connected grid over the cells that survive `removed`. Vertex ids follow
/// row-major order of the surviving cells and carry `(x, y)` labels.
pub fn grid_graph(width: usize, height: usize, removed: &BTreeSet<(usize, usize)>) -> Result<Graph, GraphError> {
    for &(x, y) in removed {
        if x >= width || y >= height {
            return Err(GraphError::CellOutOfRange { x, y, width, height });
        }
    }
    let mut id = vec![None; width * height];
    let mut coords = Vec::new();
    for y in 0..height {
        for x in 0..width {
            if !removed.contains(&(x, y)) {
                id[y * width + x] = Some(coords.len());
                coords.push((x as i64, y as i64));
            }
        }
    }
    if coords.is_empty() {
        return Err(GraphError::Empty);
    }
    let mut edges = Vec::new();
    for y in 0..height {
        for x in 0..width {
            let Some(a) = id[y * width + x] else { continue };
            if x + 1 < width {
                if let Some(b) = id[y * width + x + 1] {
                    edges.push((a, b));
                }
            }
            if y + 1 < height {
                if let Some(b) = id[(y + 1) * width + x] {
                    edges.push((a, b));
                }
            }
        }
    }
    Graph::new(coords.len(), edges)?.with_coords(coords)
}

pub fn shortest_path_length(graph: &Graph, u: VertexId, v: VertexId) -> Result<usize, GraphError> {
    graph.check_vertex(u)?;
    graph.check_vertex(v)?;
    graph.bfs_distances(u)[v].ok_or(GraphError::Unreachable { from: u, to: v })
}

/// A square cell whose diagonals may be crossed: `first` joins corners
/// v1-v3, `second` joins v2-v4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DiagonalPair {
    pub first: (VertexId, VertexId),
    pub second: (VertexId, VertexId),
}

impl DiagonalPair {
    pub fn vertices(&self) -> [VertexId; 4] {
        [self.first.0, self.first.1, self.second.0, self.second.1]
    }

    /// Which diagonal (0 or 1) joins `a` and `b`, if either.
    pub fn diagonal_of(&self, a: VertexId, b: VertexId) -> Option<usize> {
        let same = |(x, y): (VertexId, VertexId)| (x == a && y == b) || (x == b && y == a);
        if same(self.first) {
            Some(0)
        } else if same(self.second) {
            Some(1)
        } else {
            None
        }
    }
}

/// Motion rules layered over the base meet/head-on model.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum Variant {
    #[default]
    ForbidHeadOn,
    AllowHeadOn,
    GridDiagonal(Vec<DiagonalPair>),
}

impl Variant {
    pub fn name(&self) -> &'static str {
        match self {
            Variant::ForbidHeadOn => "forbid-head-on",
            Variant::AllowHeadOn => "allow-head-on",
            Variant::GridDiagonal(_) => "grid-diagonal",
        }
    }

    pub fn diagonals(&self) -> &[DiagonalPair] {
        match self {
            Variant::GridDiagonal(pairs) => pairs,
            _ => &[],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MapfInstance {
    pub graph: Graph,
    starts: Vec<VertexId>,
    goals: Vec<VertexId>,
    pub variant: Variant,
}

impl MapfInstance {
    pub fn new(graph: Graph, starts: Vec<VertexId>, goals: Vec<VertexId>, variant: Variant) -> Result<Self, InstanceError> {
        if starts.len() != goals.len() {
            return Err(InstanceError::RobotCountMismatch { starts: starts.len(), goals: goals.len() });
        }
        for (label, list) in [("start", &starts), ("goal", &goals)] {
            let mut owner: HashMap<VertexId, RobotId> = HashMap::new();
            for (i, &v) in list.iter().enumerate() {
                graph.check_vertex(v)?;
                if let Some(&other) = owner.get(&v) {
                    return Err(InstanceError::NotInjective(other, i + 1, label, v));
                }
                owner.insert(v, i + 1);
            }
        }
        for pair in variant.diagonals() {
            for v in pair.vertices() {
                if !graph.contains(v) {
                    return Err(InstanceError::DiagonalVertex(v));
                }
            }
        }
        Ok(MapfInstance { graph, starts, goals, variant })
    }

    pub fn robot_count(&self) -> usize {
        self.starts.len()
    }

    pub fn start(&self, robot: RobotId) -> VertexId {
        self.starts[robot - 1]
    }

    pub fn goal(&self, robot: RobotId) -> VertexId {
        self.goals[robot - 1]
    }

    pub fn starts(&self) -> &[VertexId] {
        &self.starts
    }

    pub fn goals(&self) -> &[VertexId] {
        &self.goals
    }

    pub fn robots(&self) -> impl Iterator<Item = RobotId> {
        1..=self.starts.len()
    }

    /// Per-robot shortest start-goal distance, or the first robot whose goal
    /// is unreachable.
    pub fn shortest_lengths(&self) -> Result<Vec<usize>, RobotId> {
        self.robots()
            .map(|i| self.graph.bfs_distances(self.start(i))[self.goal(i)].ok_or(i))
            .collect()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolutionError {
    #[error("solution has no robots")]
    NoRobots,
    #[error("path of robot {robot} has length {len}, expected {expected}")]
    Ragged { robot: RobotId, len: usize, expected: usize },
    #[error("path of robot {0} is empty")]
    EmptyPath(RobotId),
}

/// Per-robot vertex sequences over steps `0..=horizon`, padded at the end.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Solution {
    paths: Vec<Vec<VertexId>>,
}

impl Solution {
    pub fn new(paths: Vec<Vec<VertexId>>) -> Result<Self, SolutionError> {
        let first = paths.first().ok_or(SolutionError::NoRobots)?;
        if first.is_empty() {
            return Err(SolutionError::EmptyPath(1));
        }
        let expected = first.len();
        for (i, p) in paths.iter().enumerate() {
            if p.len() != expected {
                return Err(SolutionError::Ragged { robot: i + 1, len: p.len(), expected });
            }
        }
        Ok(Solution { paths })
    }

    /// Builds a solution from paths of unequal length by repeating each last
    /// vertex.
    pub fn from_ragged(mut paths: Vec<Vec<VertexId>>) -> Result<Self, SolutionError> {
        for (i, p) in paths.iter().enumerate() {
            if p.is_empty() {
                return Err(SolutionError::EmptyPath(i + 1));
            }
        }
        let len = paths.iter().map(Vec::len).max().ok_or(SolutionError::NoRobots)?;
        for p in &mut paths {
            let last = *p.last().unwrap();
            p.resize(len, last);
        }
        Solution::new(paths)
    }

    pub fn horizon(&self) -> usize {
        self.paths[0].len() - 1
    }

    pub fn robot_count(&self) -> usize {
        self.paths.len()
    }

    pub fn path(&self, robot: RobotId) -> &[VertexId] {
        &self.paths[robot - 1]
    }

    pub fn paths(&self) -> &[Vec<VertexId>] {
        &self.paths
    }

    pub fn into_paths(self) -> Vec<Vec<VertexId>> {
        self.paths
    }

    /// Vertex of every robot at `step`.
    pub fn configuration(&self, step: usize) -> Vec<VertexId> {
        self.paths.iter().map(|p| p[step]).collect()
    }

    /// First step from which the robot never leaves its final vertex.
    pub fn arrival(&self, robot: RobotId) -> usize {
        let p = &self.paths[robot - 1];
        let last = *p.last().unwrap();
        let mut k = p.len() - 1;
        while k > 0 && p[k - 1] == last {
            k -= 1;
        }
        k
    }

    pub fn makespan(&self) -> usize {
        (1..=self.paths.len()).map(|i| self.arrival(i)).max().unwrap_or(0)
    }

    pub fn total_distance(&self) -> usize {
        self.paths.iter().map(|p| p.windows(2).filter(|w| w[0] != w[1]).count()).sum()
    }

    /// Extends every path by repeating its final vertex up to `horizon`.
    pub fn padded(&self, horizon: usize) -> Solution {
        let mut paths = self.paths.clone();
        for p in &mut paths {
            let last = *p.last().unwrap();
            if p.len() < horizon + 1 {
                p.resize(horizon + 1, last);
            }
        }
        Solution { paths }
    }

    /// Drops trailing steps after the makespan.
    pub fn trimmed(&self) -> Solution {
        let len = self.makespan() + 1;
        Solution { paths: self.paths.iter().map(|p| p[..len].to_vec()).collect() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    UnknownVertex { robot: RobotId, step: usize, vertex: VertexId },
    WrongStart { robot: RobotId, expected: VertexId, found: VertexId },
    NotAtGoal { robot: RobotId, goal: VertexId, found: VertexId },
    NonAdjacentStep { robot: RobotId, step: usize, from: VertexId, to: VertexId },
    Meet { robots: (RobotId, RobotId), step: usize, vertex: VertexId },
    HeadOn { robots: (RobotId, RobotId), step: usize, edge: (VertexId, VertexId) },
    /// Both diagonals of one square cell used in the same step.
    DiagonalCrossing { robots: (RobotId, RobotId), step: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub makespan: usize,
    pub total_distance: usize,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("solution covers {found} robots but the instance has {expected}")]
pub struct StructuralError {
    pub expected: usize,
    pub found: usize,
}

/// Checks a solution against path feasibility and the collision rules of the
/// instance variant.
pub fn validate_solution(instance: &MapfInstance, sol: &Solution) -> Result<ValidationReport, StructuralError> {
    let n = instance.robot_count();
    if sol.robot_count() != n {
        return Err(StructuralError { expected: n, found: sol.robot_count() });
    }
    let graph = &instance.graph;
    let horizon = sol.horizon();
    let mut violations = Vec::new();

    let mut known = true;
    for i in instance.robots() {
        for (step, &v) in sol.path(i).iter().enumerate() {
            if !graph.contains(v) {
                violations.push(Violation::UnknownVertex { robot: i, step, vertex: v });
                known = false;
            }
        }
    }
    if !known {
        return Ok(ValidationReport { violations, makespan: sol.makespan(), total_distance: sol.total_distance() });
    }

    // Diagonal moves by (step, pair, diagonal) for the crossing rule.
    let diagonals = instance.variant.diagonals();
    let mut diagonal_use: HashMap<(usize, usize), Vec<(usize, RobotId)>> = HashMap::new();

    for i in instance.robots() {
        let p = sol.path(i);
        if p[0] != instance.start(i) {
            violations.push(Violation::WrongStart { robot: i, expected: instance.start(i), found: p[0] });
        }
        if p[horizon] != instance.goal(i) {
            violations.push(Violation::NotAtGoal { robot: i, goal: instance.goal(i), found: p[horizon] });
        }
        for step in 0..horizon {
            let (a, b) = (p[step], p[step + 1]);
            if a == b || graph.has_edge(a, b) {
                continue;
            }
            let diag = diagonals.iter().enumerate().find_map(|(k, d)| d.diagonal_of(a, b).map(|which| (k, which)));
            match diag {
                Some((k, which)) => diagonal_use.entry((step, k)).or_default().push((which, i)),
                None => violations.push(Violation::NonAdjacentStep { robot: i, step, from: a, to: b }),
            }
        }
    }

    for ((step, _), uses) in &diagonal_use {
        for x in 0..uses.len() {
            for y in x + 1..uses.len() {
                if uses[x].0 != uses[y].0 {
                    violations.push(Violation::DiagonalCrossing { robots: (uses[x].1, uses[y].1), step: *step });
                }
            }
        }
    }

    for step in 0..=horizon {
        let mut occupant: HashMap<VertexId, RobotId> = HashMap::with_capacity(n);
        for i in instance.robots() {
            let v = sol.path(i)[step];
            if let Some(&j) = occupant.get(&v) {
                violations.push(Violation::Meet { robots: (j, i), step, vertex: v });
            } else {
                occupant.insert(v, i);
            }
        }
    }

    if instance.variant != Variant::AllowHeadOn {
        for step in 0..horizon {
            let mut moves: HashMap<(VertexId, VertexId), RobotId> = HashMap::new();
            for i in instance.robots() {
                let (a, b) = (sol.path(i)[step], sol.path(i)[step + 1]);
                if a != b {
                    moves.insert((a, b), i);
                }
            }
            for (&(a, b), &i) in &moves {
                if let Some(&j) = moves.get(&(b, a)) {
                    if i < j {
                        violations.push(Violation::HeadOn { robots: (i, j), step, edge: (a, b) });
                    }
                }
            }
        }
    }

    violations.sort_by_key(violation_order);
    Ok(ValidationReport { violations, makespan: sol.makespan(), total_distance: sol.total_distance() })
}

fn violation_order(v: &Violation) -> (usize, usize, usize) {
    match *v {
        Violation::UnknownVertex { robot, step, .. } => (0, step, robot),
        Violation::WrongStart { robot, .. } => (1, 0, robot),
        Violation::NotAtGoal { robot, .. } => (2, 0, robot),
        Violation::NonAdjacentStep { robot, step, .. } => (3, step, robot),
        Violation::Meet { robots, step, .. } => (4, step, robots.0),
        Violation::HeadOn { robots, step, .. } => (5, step, robots.0),
        Violation::DiagonalCrossing { robots, step } => (6, step, robots.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(n: usize) -> Graph {
        Graph::new(n, (0..n - 1).map(|i| (i, i + 1))).unwrap()
    }

    #[test]
    fn grid_counts() {
        let g = grid_graph(3, 3, &BTreeSet::new()).unwrap();
        assert_eq!((g.vertex_count(), g.edge_count()), (9, 12));
        let g = grid_graph(2, 1, &BTreeSet::new()).unwrap();
        assert_eq!((g.vertex_count(), g.edge_count()), (2, 1));
        assert_eq!(g.coord(1), Some((1, 0)));
    }

    #[test]
    fn grid_with_removed_cells() {
        let removed: BTreeSet<_> = [(1, 1)].into_iter().collect();
        let g = grid_graph(3, 3, &removed).unwrap();
        assert_eq!((g.vertex_count(), g.edge_count()), (8, 8));
        assert_eq!(g.vertex_at(1, 1), None);
        assert!(g.is_connected());
    }

    #[test]
    fn grid_all_removed_is_error() {
        let removed: BTreeSet<_> = [(0, 0), (1, 0)].into_iter().collect();
        assert_eq!(grid_graph(2, 1, &removed), Err(GraphError::Empty));
        let out: BTreeSet<_> = [(5, 0)].into_iter().collect();
        assert!(matches!(grid_graph(2, 1, &out), Err(GraphError::CellOutOfRange { .. })));
    }

    #[test]
    fn simple_graph_enforced() {
        assert_eq!(Graph::new(2, [(0, 0)]), Err(GraphError::SelfLoop(0)));
        assert_eq!(Graph::new(2, [(0, 1), (1, 0)]), Err(GraphError::DuplicateEdge(0, 1)));
        assert!(matches!(Graph::new(2, [(0, 2)]), Err(GraphError::VertexOutOfRange { .. })));
    }

    #[test]
    fn shortest_paths() {
        let g = grid_graph(3, 3, &BTreeSet::new()).unwrap();
        assert_eq!(shortest_path_length(&g, 0, 8), Ok(4));
        assert_eq!(shortest_path_length(&g, 4, 4), Ok(0));
        let split = Graph::new(3, [(0, 1)]).unwrap();
        assert_eq!(shortest_path_length(&split, 0, 2), Err(GraphError::Unreachable { from: 0, to: 2 }));
        assert!(!split.is_connected());
    }

    #[test]
    fn instance_rejects_shared_starts() {
        let err = MapfInstance::new(line(3), vec![0, 0], vec![1, 2], Variant::ForbidHeadOn).unwrap_err();
        assert_eq!(err, InstanceError::NotInjective(1, 2, "start", 0));
        assert!(MapfInstance::new(line(3), vec![0], vec![7], Variant::ForbidHeadOn).is_err());
    }

    #[test]
    fn solution_metrics_use_arrival_not_horizon() {
        let sol = Solution::new(vec![vec![0, 1, 2, 2, 2], vec![3, 3, 3, 3, 3]]).unwrap();
        assert_eq!(sol.arrival(1), 2);
        assert_eq!(sol.arrival(2), 0);
        assert_eq!(sol.makespan(), 2);
        assert_eq!(sol.total_distance(), 2);
        let padded = sol.padded(9);
        assert_eq!(padded.horizon(), 9);
        assert_eq!((padded.makespan(), padded.total_distance()), (2, 2));
        assert_eq!(sol.trimmed().horizon(), 2);
    }

    #[test]
    fn all_at_goal_is_valid() {
        let inst = MapfInstance::new(line(3), vec![0, 2], vec![0, 2], Variant::ForbidHeadOn).unwrap();
        let sol = Solution::new(vec![vec![0], vec![2]]).unwrap();
        let report = validate_solution(&inst, &sol).unwrap();
        assert!(report.is_valid());
        assert_eq!((report.makespan, report.total_distance), (0, 0));
    }

    #[test]
    fn swap_is_head_on_unless_allowed() {
        let g = line(2);
        let sol = Solution::new(vec![vec![0, 1], vec![1, 0]]).unwrap();
        let forbid = MapfInstance::new(g.clone(), vec![0, 1], vec![1, 0], Variant::ForbidHeadOn).unwrap();
        let report = validate_solution(&forbid, &sol).unwrap();
        assert_eq!(report.violations, vec![Violation::HeadOn { robots: (1, 2), step: 0, edge: (0, 1) }]);
        let allow = MapfInstance::new(g, vec![0, 1], vec![1, 0], Variant::AllowHeadOn).unwrap();
        assert!(validate_solution(&allow, &sol).unwrap().is_valid());
    }

    #[test]
    fn detects_feasibility_breaches() {
        let inst = MapfInstance::new(line(4), vec![0, 3], vec![2, 1], Variant::ForbidHeadOn).unwrap();
        let sol = Solution::new(vec![vec![1, 3, 2], vec![3, 2, 2]]).unwrap();
        let report = validate_solution(&inst, &sol).unwrap();
        assert!(report.violations.contains(&Violation::WrongStart { robot: 1, expected: 0, found: 1 }));
        assert!(report.violations.contains(&Violation::NotAtGoal { robot: 2, goal: 1, found: 2 }));
        assert!(report.violations.contains(&Violation::NonAdjacentStep { robot: 1, step: 0, from: 1, to: 3 }));
        assert!(report.violations.contains(&Violation::Meet { robots: (1, 2), step: 2, vertex: 2 }));
    }

    #[test]
    fn robot_count_mismatch_is_structural() {
        let inst = MapfInstance::new(line(3), vec![0, 2], vec![0, 2], Variant::ForbidHeadOn).unwrap();
        let sol = Solution::new(vec![vec![0]]).unwrap();
        assert_eq!(validate_solution(&inst, &sol), Err(StructuralError { expected: 2, found: 1 }));
    }

    #[test]
    fn diagonal_crossings() {
        // 2x2 grid: 0 1 / 2 3; diagonals 0-3 and 1-2.
        let g = grid_graph(2, 2, &BTreeSet::new()).unwrap();
        let pair = DiagonalPair { first: (0, 3), second: (1, 2) };
        let variant = Variant::GridDiagonal(vec![pair]);
        let inst = MapfInstance::new(g.clone(), vec![0], vec![3], variant.clone()).unwrap();
        let sol = Solution::new(vec![vec![0, 3]]).unwrap();
        assert!(validate_solution(&inst, &sol).unwrap().is_valid());

        let both = MapfInstance::new(g.clone(), vec![0, 1], vec![3, 2], variant).unwrap();
        let sol = Solution::new(vec![vec![0, 3], vec![1, 2]]).unwrap();
        let report = validate_solution(&both, &sol).unwrap();
        assert_eq!(report.violations, vec![Violation::DiagonalCrossing { robots: (1, 2), step: 0 }]);

        let plain = MapfInstance::new(g, vec![0], vec![3], Variant::ForbidHeadOn).unwrap();
        let sol = Solution::new(vec![vec![0, 3]]).unwrap();
        assert!(!validate_solution(&plain, &sol).unwrap().is_valid());
    }
}
