//! Time-expanded network construction and the path/flow conversions.
//!
//! Every graph vertex `v` gets copies `v(0)`, `v(1)`, `v(1)'`, ..., `v(T)'`
//! (with `v(0)` doubling as `v(0)'`). Unit-capacity throughput arcs
//! `v(t) -> v(t)'` make a vertex admit one robot per step, stay arcs
//! `v(t)' -> v(t+1)` encode waiting, and one merge/split gadget per edge and
//! step carries a traversal in either direction but never both. A loopback
//! arc per robot closes its route into a circulation.
//!
//! Arcs are laid out step by step so that arc index order follows time; the
//! loopback arcs are always the last `n` arcs.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::graph::{validate_solution, MapfInstance, RobotId, Solution, Variant, VertexId, Violation};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CostProfile {
    pub traverse_cost: i64,
    pub stay_cost: i64,
}

impl Default for CostProfile {
    fn default() -> Self {
        CostProfile { traverse_cost: 1, stay_cost: 0 }
    }
}

impl CostProfile {
    /// Stay arcs charged like traversals.
    pub fn unit_stay() -> Self {
        CostProfile { traverse_cost: 1, stay_cost: 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GadgetSlot {
    Merge,
    Split,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeKind {
    VertexCopy { vertex: VertexId, time: usize, primed: bool },
    GadgetInternal { edge: usize, time: usize, slot: GadgetSlot },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArcKind {
    Stay { vertex: VertexId, time: usize },
    Throughput { vertex: VertexId, time: usize },
    GadgetIn { edge: usize, time: usize, from: VertexId },
    GadgetMiddle { edge: usize, time: usize },
    GadgetOut { edge: usize, time: usize, to: VertexId },
    /// Plain direction arc used when head-on exchanges are allowed.
    Traverse { edge: usize, time: usize, from: VertexId, to: VertexId },
    DiagonalPath { pair: usize, time: usize, from: VertexId, to: VertexId },
    Loopback { robot: RobotId },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NetArc {
    pub tail: usize,
    pub head: usize,
    pub kind: ArcKind,
    pub capacity: u32,
    pub cost: i64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("arc {0} out of range")]
    UnknownArc(usize),
    #[error("arc {arc} carries {load} units over capacity {capacity}")]
    Capacity { arc: usize, load: u32, capacity: u32 },
    #[error("crossing bundle {bundle} carries {load} units")]
    Bundle { bundle: usize, load: u32 },
    #[error("robot {robot} uses loopback arc {arc} of another robot")]
    ForeignLoopback { robot: RobotId, arc: usize },
    #[error("conservation violated for robot {robot} at node {node} (in {inflow}, out {outflow})")]
    Conservation { robot: RobotId, node: usize, inflow: u32, outflow: u32 },
    #[error("robot {0} carries no flow")]
    ZeroValue(RobotId),
    #[error("robot {robot} has fractional value {value} on arc {arc}")]
    Fractional { robot: RobotId, arc: usize, value: f64 },
    #[error("robot {0} has flow disconnected from its route")]
    Detached(RobotId),
    #[error("flow covers {found} robots, network has {expected}")]
    RobotCount { expected: usize, found: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExpansionError {
    #[error("diagonal pair {0} is malformed or references a missing vertex")]
    BadDiagonal(usize),
    #[error("solution horizon {solution} does not match network horizon {network}")]
    HorizonMismatch { solution: usize, network: usize },
    #[error("solution covers {found} robots, network has {expected}")]
    RobotCount { expected: usize, found: usize },
    #[error("solution is not valid: {0:?}")]
    InvalidSolution(Vec<Violation>),
    #[error(transparent)]
    Flow(#[from] FlowError),
}

/// Node and arc counts by kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Census {
    pub nodes: usize,
    pub vertex_copies: usize,
    pub gadget_internals: usize,
    pub arcs: usize,
    pub stay: usize,
    pub throughput: usize,
    pub gadget: usize,
    pub traverse: usize,
    pub diagonal: usize,
    pub loopback: usize,
}

impl Census {
    /// Closed-form counts for a network built from these parameters.
    pub fn expected(vertices: usize, edges: usize, horizon: usize, robots: usize, variant: &Variant) -> Census {
        let (v, e, t) = (vertices, edges, horizon);
        let gadgets = !matches!(variant, Variant::AllowHeadOn);
        let diagonals = variant.diagonals().len();
        let vertex_copies = v * (2 * t + 1);
        let gadget_internals = if gadgets { 2 * e * t } else { 0 };
        let stay = v * t;
        let throughput = v * t;
        let gadget = if gadgets { 5 * e * t } else { 0 };
        let traverse = if gadgets { 0 } else { 2 * e * t };
        let diagonal = 4 * diagonals * t;
        Census {
            nodes: vertex_copies + gadget_internals,
            vertex_copies,
            gadget_internals,
            arcs: stay + throughput + gadget + traverse + diagonal + robots,
            stay,
            throughput,
            gadget,
            traverse,
            diagonal,
            loopback: robots,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TimeExpandedNetwork {
    instance: MapfInstance,
    horizon: usize,
    costs: CostProfile,
    nodes: Vec<NodeKind>,
    arcs: Vec<NetArc>,
    out_arcs: Vec<Vec<usize>>,
    in_arcs: Vec<Vec<usize>>,
    bundles: Vec<Vec<usize>>,
    edge_index: HashMap<(VertexId, VertexId), usize>,
    stay_arc: Vec<usize>,
    throughput_arc: Vec<usize>,
    edge_arc: Vec<usize>,
    diagonal_arc: Vec<usize>,
}

/// Builds the time-expanded network of `instance` over `horizon` steps.
pub fn expand(instance: &MapfInstance, horizon: usize, costs: CostProfile) -> Result<TimeExpandedNetwork, ExpansionError> {
    let graph = &instance.graph;
    let nv = graph.vertex_count();
    let ne = graph.edge_count();
    let diagonals = instance.variant.diagonals();
    for (k, pair) in diagonals.iter().enumerate() {
        let vs = pair.vertices();
        let distinct = (0..4).all(|a| (a + 1..4).all(|b| vs[a] != vs[b]));
        if !distinct || vs.iter().any(|&v| !graph.contains(v)) {
            return Err(ExpansionError::BadDiagonal(k));
        }
    }
    let gadgets = !matches!(instance.variant, Variant::AllowHeadOn);

    let mut net = TimeExpandedNetwork {
        instance: instance.clone(),
        horizon,
        costs,
        nodes: Vec::new(),
        arcs: Vec::new(),
        out_arcs: Vec::new(),
        in_arcs: Vec::new(),
        bundles: Vec::new(),
        edge_index: graph.edges().iter().enumerate().map(|(i, &e)| (e, i)).collect(),
        stay_arc: Vec::with_capacity(nv * horizon),
        throughput_arc: Vec::with_capacity(nv * horizon),
        edge_arc: Vec::with_capacity(ne * horizon),
        diagonal_arc: Vec::with_capacity(diagonals.len() * horizon),
    };

    for v in 0..nv {
        net.nodes.push(NodeKind::VertexCopy { vertex: v, time: 0, primed: false });
    }
    for t in 1..=horizon {
        for primed in [false, true] {
            for v in 0..nv {
                net.nodes.push(NodeKind::VertexCopy { vertex: v, time: t, primed });
            }
        }
    }
    if gadgets {
        for t in 0..horizon {
            for e in 0..ne {
                net.nodes.push(NodeKind::GadgetInternal { edge: e, time: t, slot: GadgetSlot::Merge });
                net.nodes.push(NodeKind::GadgetInternal { edge: e, time: t, slot: GadgetSlot::Split });
            }
        }
    }
    net.out_arcs = vec![Vec::new(); net.nodes.len()];
    net.in_arcs = vec![Vec::new(); net.nodes.len()];

    for t in 0..=horizon {
        if t >= 1 {
            for v in 0..nv {
                let id = net.push_arc(net.in_node(v, t), net.out_node(v, t), ArcKind::Throughput { vertex: v, time: t }, 0);
                net.throughput_arc.push(id);
            }
        }
        if t == horizon {
            break;
        }
        for v in 0..nv {
            let id = net.push_arc(net.out_node(v, t), net.in_node(v, t + 1), ArcKind::Stay { vertex: v, time: t }, costs.stay_cost);
            net.stay_arc.push(id);
        }
        for (e, &(a, b)) in graph.edges().iter().enumerate() {
            let first = net.arcs.len();
            if gadgets {
                let merge = net.gadget_node(e, t, GadgetSlot::Merge);
                let split = net.gadget_node(e, t, GadgetSlot::Split);
                net.push_arc(net.out_node(a, t), merge, ArcKind::GadgetIn { edge: e, time: t, from: a }, 0);
                net.push_arc(net.out_node(b, t), merge, ArcKind::GadgetIn { edge: e, time: t, from: b }, 0);
                net.push_arc(merge, split, ArcKind::GadgetMiddle { edge: e, time: t }, costs.traverse_cost);
                net.push_arc(split, net.in_node(a, t + 1), ArcKind::GadgetOut { edge: e, time: t, to: a }, 0);
                net.push_arc(split, net.in_node(b, t + 1), ArcKind::GadgetOut { edge: e, time: t, to: b }, 0);
            } else {
                net.push_arc(net.out_node(a, t), net.in_node(b, t + 1), ArcKind::Traverse { edge: e, time: t, from: a, to: b }, costs.traverse_cost);
                net.push_arc(net.out_node(b, t), net.in_node(a, t + 1), ArcKind::Traverse { edge: e, time: t, from: b, to: a }, costs.traverse_cost);
            }
            net.edge_arc.push(first);
        }
        for (k, pair) in diagonals.iter().enumerate() {
            let first = net.arcs.len();
            let (v1, v3) = pair.first;
            let (v2, v4) = pair.second;
            for (from, to) in [(v1, v3), (v3, v1), (v2, v4), (v4, v2)] {
                net.push_arc(net.out_node(from, t), net.in_node(to, t + 1), ArcKind::DiagonalPath { pair: k, time: t, from, to }, costs.traverse_cost);
            }
            net.bundles.push((first..first + 4).collect());
            net.diagonal_arc.push(first);
        }
    }

    for i in instance.robots() {
        let tail = net.out_node(instance.goal(i), horizon);
        let head = net.in_node(instance.start(i), 0);
        net.push_arc(tail, head, ArcKind::Loopback { robot: i }, 0);
    }
    Ok(net)
}

impl TimeExpandedNetwork {
    fn push_arc(&mut self, tail: usize, head: usize, kind: ArcKind, cost: i64) -> usize {
        let id = self.arcs.len();
        self.arcs.push(NetArc { tail, head, kind, capacity: 1, cost });
        self.out_arcs[tail].push(id);
        self.in_arcs[head].push(id);
        id
    }

    fn gadget_node(&self, edge: usize, time: usize, slot: GadgetSlot) -> usize {
        let nv = self.instance.graph.vertex_count();
        let ne = self.instance.graph.edge_count();
        let base = nv * (2 * self.horizon + 1);
        base + 2 * (time * ne + edge) + usize::from(slot == GadgetSlot::Split)
    }

    /// Node `v(t)` (entry copy; `v(0)` for `t = 0`).
    pub fn in_node(&self, v: VertexId, t: usize) -> usize {
        let nv = self.instance.graph.vertex_count();
        if t == 0 {
            v
        } else {
            nv + (t - 1) * 2 * nv + v
        }
    }

    /// Node `v(t)'` (exit copy; `v(0)` for `t = 0`).
    pub fn out_node(&self, v: VertexId, t: usize) -> usize {
        let nv = self.instance.graph.vertex_count();
        if t == 0 {
            v
        } else {
            nv + (t - 1) * 2 * nv + nv + v
        }
    }

    pub fn instance(&self) -> &MapfInstance {
        &self.instance
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn robot_count(&self) -> usize {
        self.instance.robot_count()
    }

    pub fn costs(&self) -> CostProfile {
        self.costs
    }

    pub fn nodes(&self) -> &[NodeKind] {
        &self.nodes
    }

    pub fn arcs(&self) -> &[NetArc] {
        &self.arcs
    }

    pub fn out_arcs(&self, node: usize) -> &[usize] {
        &self.out_arcs[node]
    }

    pub fn in_arcs(&self, node: usize) -> &[usize] {
        &self.in_arcs[node]
    }

    /// Groups of arcs that share a single unit of capacity.
    pub fn bundles(&self) -> &[Vec<usize>] {
        &self.bundles
    }

    /// Index of the first arc belonging to step `t` (`1 <= t <= T`); arcs
    /// below it all end at or before time `t`.
    pub fn layer_start(&self, t: usize) -> usize {
        let nv = self.instance.graph.vertex_count();
        self.throughput_arc[(t - 1) * nv]
    }

    /// Index of the loopback arc of `robot`.
    pub fn loopback_arc(&self, robot: RobotId) -> usize {
        self.arcs.len() - self.robot_count() + robot - 1
    }

    pub fn sources(&self) -> Vec<usize> {
        self.instance.robots().map(|i| self.in_node(self.instance.start(i), 0)).collect()
    }

    pub fn sinks(&self) -> Vec<usize> {
        self.instance.robots().map(|i| self.out_node(self.instance.goal(i), self.horizon)).collect()
    }

    pub fn census(&self) -> Census {
        let mut c = Census { nodes: self.nodes.len(), arcs: self.arcs.len(), ..Census::default() };
        for node in &self.nodes {
            match node {
                NodeKind::VertexCopy { .. } => c.vertex_copies += 1,
                NodeKind::GadgetInternal { .. } => c.gadget_internals += 1,
            }
        }
        for arc in &self.arcs {
            match arc.kind {
                ArcKind::Stay { .. } => c.stay += 1,
                ArcKind::Throughput { .. } => c.throughput += 1,
                ArcKind::GadgetIn { .. } | ArcKind::GadgetMiddle { .. } | ArcKind::GadgetOut { .. } => c.gadget += 1,
                ArcKind::Traverse { .. } => c.traverse += 1,
                ArcKind::DiagonalPath { .. } => c.diagonal += 1,
                ArcKind::Loopback { .. } => c.loopback += 1,
            }
        }
        c
    }

    /// Graph vertices a robot on `node` may stand on, and the time step.
    /// Gadget internals sit between `time` and `time + 1`.
    pub fn node_position(&self, node: usize) -> (usize, [VertexId; 2]) {
        match self.nodes[node] {
            NodeKind::VertexCopy { vertex, time, .. } => (time, [vertex, vertex]),
            NodeKind::GadgetInternal { edge, time, .. } => {
                let (a, b) = self.instance.graph.edges()[edge];
                (time, [a, b])
            }
        }
    }

    /// Deterministic text listing of nodes and arcs.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let c = self.census();
        writeln!(
            out,
            "network horizon={} robots={} variant={} nodes={} arcs={}",
            self.horizon,
            self.robot_count(),
            self.instance.variant.name(),
            c.nodes,
            c.arcs
        )
        .unwrap();
        for (id, node) in self.nodes.iter().enumerate() {
            let label = match *node {
                NodeKind::VertexCopy { vertex, time, primed } => {
                    format!("v{}({}){}", vertex, time, if primed { "'" } else { "" })
                }
                NodeKind::GadgetInternal { edge, time, slot } => {
                    let s = if slot == GadgetSlot::Merge { "merge" } else { "split" };
                    format!("g{}@{}:{}", edge, time, s)
                }
            };
            writeln!(out, "node {} {}", id, label).unwrap();
        }
        for (id, arc) in self.arcs.iter().enumerate() {
            let label = match arc.kind {
                ArcKind::Stay { vertex, time } => format!("stay v{} t{}", vertex, time),
                ArcKind::Throughput { vertex, time } => format!("throughput v{} t{}", vertex, time),
                ArcKind::GadgetIn { edge, time, from } => format!("gadget-in e{} t{} from v{}", edge, time, from),
                ArcKind::GadgetMiddle { edge, time } => format!("gadget-middle e{} t{}", edge, time),
                ArcKind::GadgetOut { edge, time, to } => format!("gadget-out e{} t{} to v{}", edge, time, to),
                ArcKind::Traverse { edge, time, from, to } => format!("traverse e{} t{} v{}->v{}", edge, time, from, to),
                ArcKind::DiagonalPath { pair, time, from, to } => format!("diagonal d{} t{} v{}->v{}", pair, time, from, to),
                ArcKind::Loopback { robot } => format!("loopback r{}", robot),
            };
            writeln!(out, "arc {} {}->{} cap={} cost={} {}", id, arc.tail, arc.head, arc.capacity, arc.cost, label).unwrap();
        }
        out
    }

    /// Arcs a robot uses to get from `a` at step `t` to `b` at step `t + 1`.
    fn step_arcs(&self, a: VertexId, b: VertexId, t: usize) -> Option<Vec<usize>> {
        let nv = self.instance.graph.vertex_count();
        let ne = self.instance.graph.edge_count();
        if a == b {
            return Some(vec![self.stay_arc[t * nv + a]]);
        }
        if let Some(&e) = self.edge_index.get(&(a.min(b), a.max(b))) {
            let first = self.edge_arc[t * ne + e];
            let (lo, _) = self.instance.graph.edges()[e];
            let forward = a == lo;
            return Some(if matches!(self.instance.variant, Variant::AllowHeadOn) {
                vec![if forward { first } else { first + 1 }]
            } else if forward {
                vec![first, first + 2, first + 4]
            } else {
                vec![first + 1, first + 2, first + 3]
            });
        }
        let diagonals = self.instance.variant.diagonals();
        for (k, pair) in diagonals.iter().enumerate() {
            let first = self.diagonal_arc[t * diagonals.len() + k];
            let order = [pair.first, (pair.first.1, pair.first.0), pair.second, (pair.second.1, pair.second.0)];
            if let Some(offset) = order.iter().position(|&m| m == (a, b)) {
                return Some(vec![first + offset]);
            }
        }
        None
    }
}

/// Unit flow per robot, stored as the sorted set of arcs it uses.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Flow {
    per_robot: Vec<Vec<usize>>,
}

impl Flow {
    pub fn new(mut per_robot: Vec<Vec<usize>>) -> Self {
        for arcs in &mut per_robot {
            arcs.sort_unstable();
            arcs.dedup();
        }
        Flow { per_robot }
    }

    /// Builds a flow from per-robot arc values, rejecting anything not 0 or 1.
    pub fn from_values(values: &[Vec<f64>]) -> Result<Flow, FlowError> {
        let mut per_robot = Vec::with_capacity(values.len());
        for (r, row) in values.iter().enumerate() {
            let mut arcs = Vec::new();
            for (arc, &x) in row.iter().enumerate() {
                if x == 1.0 {
                    arcs.push(arc);
                } else if x != 0.0 {
                    return Err(FlowError::Fractional { robot: r + 1, arc, value: x });
                }
            }
            per_robot.push(arcs);
        }
        Ok(Flow { per_robot })
    }

    pub fn robot_count(&self) -> usize {
        self.per_robot.len()
    }

    pub fn arcs(&self, robot: RobotId) -> &[usize] {
        &self.per_robot[robot - 1]
    }

    pub fn carries(&self, robot: RobotId, arc: usize) -> bool {
        self.per_robot[robot - 1].binary_search(&arc).is_ok()
    }

    /// Flow value of `robot`: whether it uses its loopback arc.
    pub fn value(&self, net: &TimeExpandedNetwork, robot: RobotId) -> u32 {
        u32::from(self.carries(robot, net.loopback_arc(robot)))
    }

    pub fn cost(&self, net: &TimeExpandedNetwork) -> i64 {
        self.per_robot.iter().flatten().map(|&a| net.arcs[a].cost).sum()
    }
}

/// Checks capacities, crossing bundles, loopback ownership and per-robot
/// conservation at every node.
pub fn verify_flow(net: &TimeExpandedNetwork, flow: &Flow) -> Result<(), FlowError> {
    let n = net.robot_count();
    if flow.robot_count() != n {
        return Err(FlowError::RobotCount { expected: n, found: flow.robot_count() });
    }
    let mut load = vec![0u32; net.arcs.len()];
    for i in 1..=n {
        for &a in flow.arcs(i) {
            let arc = net.arcs.get(a).ok_or(FlowError::UnknownArc(a))?;
            if let ArcKind::Loopback { robot } = arc.kind {
                if robot != i {
                    return Err(FlowError::ForeignLoopback { robot: i, arc: a });
                }
            }
            load[a] += 1;
        }
    }
    for (a, arc) in net.arcs.iter().enumerate() {
        if load[a] > arc.capacity {
            return Err(FlowError::Capacity { arc: a, load: load[a], capacity: arc.capacity });
        }
    }
    for (b, bundle) in net.bundles.iter().enumerate() {
        let total: u32 = bundle.iter().map(|&a| load[a]).sum();
        if total > 1 {
            return Err(FlowError::Bundle { bundle: b, load: total });
        }
    }
    let mut balance: HashMap<usize, (u32, u32)> = HashMap::new();
    for i in 1..=n {
        balance.clear();
        for &a in flow.arcs(i) {
            balance.entry(net.arcs[a].head).or_default().0 += 1;
            balance.entry(net.arcs[a].tail).or_default().1 += 1;
        }
        let mut bad: Vec<_> = balance.iter().filter(|(_, (i_, o))| i_ != o).map(|(&node, &(i_, o))| (node, i_, o)).collect();
        bad.sort_unstable();
        if let Some(&(node, inflow, outflow)) = bad.first() {
            return Err(FlowError::Conservation { robot: i, node, inflow, outflow });
        }
    }
    Ok(())
}

/// Marks each robot's vertex copies and connects them into a unit flow that
/// closes through the robot's loopback arc.
pub fn paths_to_flow(net: &TimeExpandedNetwork, sol: &Solution) -> Result<Flow, ExpansionError> {
    if sol.horizon() != net.horizon {
        return Err(ExpansionError::HorizonMismatch { solution: sol.horizon(), network: net.horizon });
    }
    let report = validate_solution(&net.instance, sol)
        .map_err(|e| ExpansionError::RobotCount { expected: e.expected, found: e.found })?;
    if !report.is_valid() {
        return Err(ExpansionError::InvalidSolution(report.violations));
    }
    let per_robot = net
        .instance
        .robots()
        .map(|i| route_arcs(net, i, sol.path(i)).expect("validated path has arcs"))
        .collect();
    Ok(Flow::new(per_robot))
}

/// Follows `robot`'s arcs from its source copy around its loopback and
/// returns the vertex occupied at each step. Fails if the robot carries no
/// flow or uses arcs off that route.
pub fn trace_robot(net: &TimeExpandedNetwork, flow: &Flow, robot: RobotId) -> Result<Vec<VertexId>, FlowError> {
    if flow.value(net, robot) == 0 {
        return Err(FlowError::ZeroValue(robot));
    }
    let mut path = vec![usize::MAX; net.horizon + 1];
    let mut node = net.in_node(net.instance.start(robot), 0);
    let mut used = 0;
    loop {
        if let NodeKind::VertexCopy { vertex, time, .. } = net.nodes[node] {
            path[time] = vertex;
        }
        let next = net.out_arcs[node].iter().copied().find(|&a| flow.carries(robot, a));
        let Some(arc) = next else { return Err(FlowError::Detached(robot)) };
        used += 1;
        if matches!(net.arcs[arc].kind, ArcKind::Loopback { .. }) {
            break;
        }
        node = net.arcs[arc].head;
        if used > flow.arcs(robot).len() {
            return Err(FlowError::Detached(robot));
        }
    }
    if used != flow.arcs(robot).len() || path.contains(&usize::MAX) {
        return Err(FlowError::Detached(robot));
    }
    Ok(path)
}

/// Traces each robot's unit flow from its source copy and reads off the
/// vertex it occupies at every step.
pub fn flow_to_paths(net: &TimeExpandedNetwork, flow: &Flow) -> Result<Solution, ExpansionError> {
    verify_flow(net, flow)?;
    let paths = net.instance.robots().map(|i| trace_robot(net, flow, i)).collect::<Result<Vec<_>, _>>()?;
    Ok(Solution::new(paths).expect("paths share the network horizon"))
}

/// Arcs carrying one robot along `path`, which must be a feasible walk of
/// length `T` from the robot's start to its goal.
pub fn route_arcs(net: &TimeExpandedNetwork, robot: RobotId, path: &[VertexId]) -> Option<Vec<usize>> {
    let nv = net.instance.graph.vertex_count();
    let t_max = net.horizon;
    if path.len() != t_max + 1 || path[0] != net.instance.start(robot) || path[t_max] != net.instance.goal(robot) {
        return None;
    }
    let mut arcs = Vec::with_capacity(4 * path.len());
    for t in 0..t_max {
        if t >= 1 {
            arcs.push(net.throughput_arc[(t - 1) * nv + path[t]]);
        }
        arcs.extend(net.step_arcs(path[t], path[t + 1], t)?);
    }
    if t_max >= 1 {
        arcs.push(net.throughput_arc[(t_max - 1) * nv + path[t_max]]);
    }
    arcs.push(net.loopback_arc(robot));
    arcs.sort_unstable();
    Some(arcs)
}

/// Re-encodes a flow through its decoded paths. The merge/split gadget also
/// admits `u -> gadget -> u` detours that decode to a wait; this replaces
/// them with the stay arc so every flow has one canonical form.
pub fn canonical_flow(net: &TimeExpandedNetwork, flow: &Flow) -> Result<Flow, ExpansionError> {
    let sol = flow_to_paths(net, flow)?;
    paths_to_flow(net, &sol)
}
