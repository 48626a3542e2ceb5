//! 0/1 integer programs over a time-expanded network, plus LP-format export.
//!
//! Network models have one binary `x_<robot>_<arc>` per robot and arc. The
//! variable index is `arc * n + (robot - 1)`, so variables are ordered by arc
//! first and therefore by time.

use std::fmt;
use std::io::{self, Write};

use crate::expansion::{ArcKind, Flow, NodeKind, TimeExpandedNetwork};
use crate::graph::RobotId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl Relation {
    pub fn holds(self, lhs: i64, rhs: i64) -> bool {
        match self {
            Relation::Le => lhs <= rhs,
            Relation::Eq => lhs == rhs,
            Relation::Ge => lhs >= rhs,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    pub fixed: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Row {
    pub name: String,
    pub terms: Vec<(usize, i64)>,
    pub relation: Relation,
    pub rhs: i64,
}

impl Row {
    pub fn activity(&self, values: &[bool]) -> i64 {
        self.terms.iter().filter(|&&(v, _)| values[v]).map(|&(_, c)| c).sum()
    }
}

/// Robot/arc dimensions of a model built from a network.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NetworkLayout {
    pub robots: usize,
    pub arcs: usize,
}

impl NetworkLayout {
    pub fn var(&self, robot: RobotId, arc: usize) -> usize {
        arc * self.robots + robot - 1
    }

    pub fn robot_arc(&self, var: usize) -> (RobotId, usize) {
        (var % self.robots + 1, var / self.robots)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IlpModel {
    pub sense: Sense,
    pub variables: Vec<Variable>,
    pub rows: Vec<Row>,
    /// Sparse objective, sorted by variable.
    pub objective: Vec<(usize, i64)>,
    pub layout: Option<NetworkLayout>,
    /// Optional increasing variable indices splitting the variables into
    /// stages (for network models, one per time step). The solver uses them
    /// to recognise repeated subproblems.
    pub stages: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelViolation {
    Length { expected: usize, found: usize },
    Fixing { var: usize },
    Row { row: usize, activity: i64 },
}

impl fmt::Display for ModelViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelViolation::Length { expected, found } => write!(f, "assignment has {} values, model has {}", found, expected),
            ModelViolation::Fixing { var } => write!(f, "variable {} breaks its fixing", var),
            ModelViolation::Row { row, activity } => write!(f, "row {} violated with activity {}", row, activity),
        }
    }
}

impl IlpModel {
    pub fn new(sense: Sense) -> Self {
        IlpModel { sense, variables: Vec::new(), rows: Vec::new(), objective: Vec::new(), layout: None, stages: Vec::new() }
    }

    pub fn add_var(&mut self, name: impl Into<String>) -> usize {
        self.variables.push(Variable { name: name.into(), fixed: None });
        self.variables.len() - 1
    }

    pub fn fix(&mut self, var: usize, value: bool) {
        self.variables[var].fixed = Some(value);
    }

    pub fn add_row(&mut self, name: impl Into<String>, mut terms: Vec<(usize, i64)>, relation: Relation, rhs: i64) {
        terms.sort_unstable();
        self.rows.push(Row { name: name.into(), terms, relation, rhs });
    }

    pub fn set_objective(&mut self, mut terms: Vec<(usize, i64)>) {
        terms.sort_unstable();
        terms.retain(|&(_, c)| c != 0);
        self.objective = terms;
    }

    pub fn var_count(&self) -> usize {
        self.variables.len()
    }

    pub fn free_var_count(&self) -> usize {
        self.variables.iter().filter(|v| v.fixed.is_none()).count()
    }

    pub fn objective_value(&self, values: &[bool]) -> i64 {
        self.objective.iter().filter(|&&(v, _)| values[v]).map(|&(_, c)| c).sum()
    }

    /// Checks an assignment by direct substitution into every fixing and row.
    pub fn check(&self, values: &[bool]) -> Result<i64, ModelViolation> {
        if values.len() != self.variables.len() {
            return Err(ModelViolation::Length { expected: self.variables.len(), found: values.len() });
        }
        for (var, v) in self.variables.iter().enumerate() {
            if let Some(f) = v.fixed {
                if values[var] != f {
                    return Err(ModelViolation::Fixing { var });
                }
            }
        }
        for (r, row) in self.rows.iter().enumerate() {
            let activity = row.activity(values);
            if !row.relation.holds(activity, row.rhs) {
                return Err(ModelViolation::Row { row: r, activity });
            }
        }
        Ok(self.objective_value(values))
    }

    /// Reads a 0/1 assignment of a network model back as a flow.
    pub fn assignment_to_flow(&self, values: &[bool]) -> Option<Flow> {
        let layout = self.layout?;
        let mut per_robot = vec![Vec::new(); layout.robots];
        for (var, _) in values.iter().enumerate().filter(|(_, &x)| x) {
            let (robot, arc) = layout.robot_arc(var);
            per_robot[robot - 1].push(arc);
        }
        Some(Flow::new(per_robot))
    }

    /// Encodes a flow as an assignment of a network model.
    pub fn flow_to_assignment(&self, flow: &Flow) -> Option<Vec<bool>> {
        let layout = self.layout?;
        let mut values = vec![false; self.variables.len()];
        for robot in 1..=layout.robots.min(flow.robot_count()) {
            for &arc in flow.arcs(robot) {
                values[layout.var(robot, arc)] = true;
            }
        }
        Some(values)
    }
}

/// Whether robot `robot` can be on `node` in some schedule of length `T`.
fn node_reachable(net: &TimeExpandedNetwork, ds: &[Option<usize>], dg: &[Option<usize>], node: usize) -> bool {
    let t_max = net.horizon();
    let ok = |v: usize, depart: usize, remaining: usize| matches!((ds[v], dg[v]), (Some(a), Some(b)) if a <= depart && b <= remaining);
    match net.nodes()[node] {
        NodeKind::VertexCopy { vertex, time, .. } => ok(vertex, time, t_max - time),
        NodeKind::GadgetInternal { edge, time, .. } => {
            let (a, b) = net.instance().graph.edges()[edge];
            let from = [a, b].iter().any(|&v| matches!(ds[v], Some(d) if d <= time));
            let to = [a, b].iter().any(|&v| matches!(dg[v], Some(d) if d < t_max - time));
            from && to
        }
    }
}

fn build_network_model(net: &TimeExpandedNetwork, prune: bool, sense: Sense) -> IlpModel {
    let n = net.robot_count();
    let arcs = net.arcs();
    let layout = NetworkLayout { robots: n, arcs: arcs.len() };
    let mut model = IlpModel::new(sense);
    model.layout = Some(layout);
    model.stages = (1..=net.horizon()).map(|t| net.layer_start(t) * n).filter(|&b| b > 0).collect();
    model.variables.reserve(arcs.len() * n);
    for j in 0..arcs.len() {
        for i in 1..=n {
            model.variables.push(Variable { name: format!("x_{}_{}", i, j), fixed: None });
        }
    }

    for (j, arc) in arcs.iter().enumerate() {
        if let ArcKind::Loopback { robot } = arc.kind {
            for i in (1..=n).filter(|&i| i != robot) {
                model.fix(layout.var(i, j), false);
            }
        }
    }
    if prune {
        let instance = net.instance();
        for i in instance.robots() {
            let ds = instance.graph.bfs_distances(instance.start(i));
            let dg = instance.graph.bfs_distances(instance.goal(i));
            let feasible: Vec<bool> = (0..net.nodes().len()).map(|u| node_reachable(net, &ds, &dg, u)).collect();
            for (j, arc) in arcs.iter().enumerate() {
                if matches!(arc.kind, ArcKind::Loopback { .. }) {
                    continue;
                }
                if !feasible[arc.tail] || !feasible[arc.head] {
                    model.fix(layout.var(i, j), false);
                }
            }
        }
    }

    let live = |model: &IlpModel, var: usize| model.variables[var].fixed != Some(false);
    for (j, arc) in arcs.iter().enumerate() {
        let terms: Vec<(usize, i64)> = (1..=n).map(|i| (layout.var(i, j), 1)).filter(|&(v, _)| live(&model, v)).collect();
        if terms.len() > arc.capacity as usize {
            model.add_row(format!("cap_{}", j), terms, Relation::Le, i64::from(arc.capacity));
        }
    }
    for (b, bundle) in net.bundles().iter().enumerate() {
        let terms: Vec<(usize, i64)> = bundle
            .iter()
            .flat_map(|&j| (1..=n).map(move |i| (layout.var(i, j), 1)))
            .filter(|&(v, _)| live(&model, v))
            .collect();
        if terms.len() > 1 {
            model.add_row(format!("bundle_{}", b), terms, Relation::Le, 1);
        }
    }
    for node in 0..net.nodes().len() {
        for i in 1..=n {
            let mut terms: Vec<(usize, i64)> = Vec::new();
            terms.extend(net.in_arcs(node).iter().map(|&j| (layout.var(i, j), 1)));
            terms.extend(net.out_arcs(node).iter().map(|&j| (layout.var(i, j), -1)));
            // A zero-horizon loopback enters and leaves the same node.
            terms.sort_unstable();
            terms.dedup_by(|b, a| {
                let same = a.0 == b.0;
                if same {
                    a.1 += b.1;
                }
                same
            });
            terms.retain(|&(v, c)| c != 0 && live(&model, v));
            if !terms.is_empty() {
                model.add_row(format!("flow_{}_{}", i, node), terms, Relation::Eq, 0);
            }
        }
    }
    model
}

/// Maximum-flow model: maximize the number of robots whose loopback carries flow.
pub fn build_tompp_model(net: &TimeExpandedNetwork, prune: bool) -> IlpModel {
    let mut model = build_network_model(net, prune, Sense::Maximize);
    let layout = model.layout.unwrap();
    let objective = (1..=layout.robots).map(|i| (layout.var(i, net.loopback_arc(i)), 1)).collect();
    model.set_objective(objective);
    model
}

/// Minimum-cost model: every robot must reach its goal, total arc cost minimized.
pub fn build_dompp_model(net: &TimeExpandedNetwork, prune: bool) -> IlpModel {
    let mut model = build_network_model(net, prune, Sense::Minimize);
    let layout = model.layout.unwrap();
    for i in 1..=layout.robots {
        model.fix(layout.var(i, net.loopback_arc(i)), true);
    }
    let mut objective = Vec::new();
    for (j, arc) in net.arcs().iter().enumerate() {
        if matches!(arc.kind, ArcKind::Loopback { .. }) || arc.cost == 0 {
            continue;
        }
        for i in 1..=layout.robots {
            let v = layout.var(i, j);
            if model.variables[v].fixed != Some(false) {
                objective.push((v, arc.cost));
            }
        }
    }
    model.set_objective(objective);
    model
}

fn write_terms<W: Write>(out: &mut W, model: &IlpModel, terms: &[(usize, i64)]) -> io::Result<()> {
    for (k, &(v, c)) in terms.iter().enumerate() {
        if k > 0 && k % 8 == 0 {
            write!(out, "\n   ")?;
        }
        let sign = if c < 0 { "-" } else if k == 0 { "" } else { "+" };
        let sep = if k == 0 && c >= 0 { "" } else { " " };
        let mag = c.unsigned_abs();
        let name = &model.variables[v].name;
        if mag == 1 {
            write!(out, " {}{}{}", sign, sep, name)?;
        } else {
            write!(out, " {}{}{} {}", sign, sep, mag, name)?;
        }
    }
    Ok(())
}

/// Writes the model in LP format. Identical models give identical bytes.
pub fn export_lp<W: Write>(model: &IlpModel, out: &mut W) -> io::Result<()> {
    writeln!(out, "{}", if model.sense == Sense::Maximize { "Maximize" } else { "Minimize" })?;
    write!(out, " obj:")?;
    write_terms(out, model, &model.objective)?;
    writeln!(out)?;
    writeln!(out, "Subject To")?;
    for row in &model.rows {
        write!(out, " {}:", row.name)?;
        if row.terms.is_empty() {
            write!(out, " 0 {}", model.variables.first().map_or("x", |v| v.name.as_str()))?;
        }
        write_terms(out, model, &row.terms)?;
        writeln!(out, " {} {}", row.relation.symbol(), row.rhs)?;
    }
    let fixed: Vec<_> = model.variables.iter().filter_map(|v| v.fixed.map(|f| (&v.name, f))).collect();
    if !fixed.is_empty() {
        writeln!(out, "Bounds")?;
        for (name, f) in fixed {
            writeln!(out, " {} = {}", name, u8::from(f))?;
        }
    }
    writeln!(out, "Binary")?;
    for chunk in model.variables.chunks(10) {
        let names: Vec<&str> = chunk.iter().map(|v| v.name.as_str()).collect();
        writeln!(out, " {}", names.join(" "))?;
    }
    writeln!(out, "End")
}

pub fn lp_string(model: &IlpModel) -> String {
    let mut buf = Vec::new();
    export_lp(model, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("LP text is ASCII")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expansion::{expand, paths_to_flow, CostProfile};
    use crate::graph::{Graph, MapfInstance, Solution, Variant};

    fn net(starts: Vec<usize>, goals: Vec<usize>, t: usize) -> TimeExpandedNetwork {
        let g = Graph::new(2, [(0, 1)]).unwrap();
        expand(&MapfInstance::new(g, starts, goals, Variant::ForbidHeadOn).unwrap(), t, CostProfile::default()).unwrap()
    }

    #[test]
    fn variable_naming_is_positional() {
        let net = net(vec![0, 1], vec![1, 0], 1);
        let model = build_tompp_model(&net, false);
        let layout = model.layout.unwrap();
        assert_eq!(model.var_count(), 2 * net.arcs().len());
        assert_eq!(model.variables[layout.var(2, 3)].name, "x_2_3");
        assert_eq!(layout.robot_arc(layout.var(2, 3)), (2, 3));
        let l1 = net.loopback_arc(1);
        assert_eq!(model.variables[layout.var(2, l1)].fixed, Some(false));
        assert_eq!(model.variables[layout.var(1, l1)].fixed, None);
    }

    #[test]
    fn zero_horizon_rows_have_distinct_variables() {
        let net = net(vec![0], vec![0], 0);
        let model = build_tompp_model(&net, true);
        assert!(crate::solver::check_model(&model).is_ok());
        assert!(model.rows.iter().all(|r| r.terms.windows(2).all(|w| w[0].0 < w[1].0)));
    }

    #[test]
    fn valid_solution_satisfies_model() {
        let net = net(vec![0], vec![1], 2);
        let sol = Solution::new(vec![vec![0, 0, 1]]).unwrap();
        let flow = paths_to_flow(&net, &sol).unwrap();
        for prune in [false, true] {
            let model = build_tompp_model(&net, prune);
            let x = model.flow_to_assignment(&flow).unwrap();
            assert_eq!(model.check(&x), Ok(1));
            assert_eq!(model.assignment_to_flow(&x).unwrap(), flow);
            let dompp = build_dompp_model(&net, prune);
            assert_eq!(dompp.check(&x), Ok(1));
        }
    }

    #[test]
    fn pruning_fixes_unreachable_copies() {
        let net = net(vec![0], vec![1], 1);
        let model = build_tompp_model(&net, true);
        let layout = model.layout.unwrap();
        // With one step, the robot cannot stay at its start.
        let stay = net.arcs().iter().position(|a| a.kind == ArcKind::Stay { vertex: 0, time: 0 }).unwrap();
        assert_eq!(model.variables[layout.var(1, stay)].fixed, Some(false));
        assert!(model.free_var_count() < build_tompp_model(&net, false).free_var_count());
    }

    #[test]
    fn check_reports_violations() {
        let mut m = IlpModel::new(Sense::Maximize);
        let x = m.add_var("x");
        let y = m.add_var("y");
        m.add_row("c", vec![(x, 1), (y, 1)], Relation::Le, 1);
        m.fix(y, false);
        m.set_objective(vec![(x, 1)]);
        assert_eq!(m.check(&[true, false]), Ok(1));
        assert_eq!(m.check(&[true, true]), Err(ModelViolation::Fixing { var: 1 }));
        m.variables[1].fixed = None;
        assert_eq!(m.check(&[true, true]), Err(ModelViolation::Row { row: 0, activity: 2 }));
        assert!(matches!(m.check(&[true]), Err(ModelViolation::Length { .. })));
    }

    #[test]
    fn export_empty_objective_lists_binaries() {
        let mut m = IlpModel::new(Sense::Minimize);
        m.add_var("a");
        m.add_var("b");
        let text = lp_string(&m);
        assert_eq!(text, "Minimize\n obj:\nSubject To\nBinary\n a b\nEnd\n");
    }

    #[test]
    fn export_formats_coefficients() {
        let mut m = IlpModel::new(Sense::Maximize);
        let a = m.add_var("a");
        let b = m.add_var("b");
        m.add_row("r", vec![(a, -1), (b, 3)], Relation::Ge, -1);
        m.set_objective(vec![(a, 2), (b, 1)]);
        m.fix(b, true);
        let text = lp_string(&m);
        assert_eq!(text, "Maximize\n obj: 2 a + b\nSubject To\n r: - a + 3 b >= -1\nBounds\n b = 1\nBinary\n a b\nEnd\n");
        assert_eq!(text, lp_string(&m.clone()));
    }
}
