//! Independent reference implementations used by the integration tests.
//! None of them call into the planner, the solver or the puzzle module.

#![allow(dead_code)]

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet, VecDeque};

use mapf_core::graph::{Graph, MapfInstance, Variant, VertexId};
use mapf_core::ilp::{IlpModel, Sense};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Every joint move out of `pos` that keeps robots apart, never swaps two
/// robots when head-on moves are forbidden and never uses both diagonals of
/// a square at once.
pub fn joint_successors(instance: &MapfInstance, pos: &[VertexId]) -> Vec<Vec<VertexId>> {
    let g = &instance.graph;
    let mut out = Vec::new();
    let mut next = Vec::with_capacity(pos.len());
    fn rec(instance: &MapfInstance, g: &Graph, pos: &[VertexId], next: &mut Vec<VertexId>, out: &mut Vec<Vec<VertexId>>) {
        let i = next.len();
        if i == pos.len() {
            out.push(next.clone());
            return;
        }
        let options = std::iter::once(pos[i]).chain(g.neighbors(pos[i]).iter().copied());
        for v in options {
            if next.contains(&v) {
                continue;
            }
            let swap = (0..i).any(|j| next[j] == pos[i] && v == pos[j]);
            if swap && instance.variant != Variant::AllowHeadOn {
                continue;
            }
            let crossing = (0..i).any(|j| {
                instance.variant.diagonals().iter().any(|p| match (p.diagonal_of(pos[j], next[j]), p.diagonal_of(pos[i], v)) {
                    (Some(a), Some(b)) => a != b,
                    _ => false,
                })
            });
            if crossing {
                continue;
            }
            next.push(v);
            rec(instance, g, pos, next, out);
            next.pop();
        }
    }
    rec(instance, g, pos, &mut next, &mut out);
    out
}

/// Fewest joint steps from the starts to the goals, or `None`.
pub fn joint_bfs(instance: &MapfInstance) -> Option<usize> {
    let start = instance.starts().to_vec();
    let goal = instance.goals().to_vec();
    let mut seen: HashMap<Vec<VertexId>, usize> = HashMap::from([(start.clone(), 0)]);
    let mut queue = VecDeque::from([start]);
    while let Some(pos) = queue.pop_front() {
        let d = seen[&pos];
        if pos == goal {
            return Some(d);
        }
        for next in joint_successors(instance, &pos) {
            if !seen.contains_key(&next) {
                seen.insert(next.clone(), d + 1);
                queue.push_back(next);
            }
        }
    }
    None
}

/// Smallest total distance over all plans, and the fewest steps among plans
/// achieving it.
pub fn joint_min_distance(instance: &MapfInstance) -> Option<(usize, usize)> {
    let start = instance.starts().to_vec();
    let goal = instance.goals().to_vec();
    let mut best: HashMap<Vec<VertexId>, (usize, usize)> = HashMap::from([(start.clone(), (0, 0))]);
    let mut heap = BinaryHeap::from([Reverse(((0usize, 0usize), start))]);
    while let Some(Reverse((cost, pos))) = heap.pop() {
        if best.get(&pos).is_some_and(|&b| b < cost) {
            continue;
        }
        if pos == goal {
            return Some(cost);
        }
        for next in joint_successors(instance, &pos) {
            let moved = pos.iter().zip(&next).filter(|(a, b)| a != b).count();
            let c = (cost.0 + moved, cost.1 + 1);
            if best.get(&next).is_none_or(|&b| c < b) {
                best.insert(next.clone(), c);
                heap.push(Reverse((c, next)));
            }
        }
    }
    None
}

/// A random connected graph: a random spanning tree plus extra edges.
pub fn random_connected_graph(rng: &mut ChaCha8Rng, vertices: usize, extra: usize) -> Graph {
    let mut edges = HashSet::new();
    for v in 1..vertices {
        let u = rng.gen_range(0..v);
        edges.insert((u, v));
    }
    for _ in 0..extra {
        let a = rng.gen_range(0..vertices);
        let b = rng.gen_range(0..vertices);
        if a != b {
            edges.insert((a.min(b), a.max(b)));
        }
    }
    let mut edges: Vec<_> = edges.into_iter().collect();
    edges.sort();
    Graph::new(vertices, edges).unwrap()
}

/// Random instance on a connected graph with 3..=`max_vertices` vertices and
/// 1..=`max_robots` robots.
pub fn random_small_instance(seed: u64, max_vertices: usize, max_robots: usize, variant: Variant) -> MapfInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(3..=max_vertices);
    let extra = rng.gen_range(0..=n);
    let g = random_connected_graph(&mut rng, n, extra);
    let robots = rng.gen_range(1..=max_robots.min(n - 1));
    let mut cells: Vec<usize> = (0..n).collect();
    let mut pick = |rng: &mut ChaCha8Rng| {
        for i in (1..cells.len()).rev() {
            cells.swap(i, rng.gen_range(0..=i));
        }
        cells[..robots].to_vec()
    };
    let starts = pick(&mut rng);
    let goals = pick(&mut rng);
    MapfInstance::new(g, starts, goals, variant).unwrap()
}

/// Optimum of a small 0/1 model by trying every assignment of its free
/// variables. `None` when infeasible.
pub fn brute_force(model: &IlpModel) -> Option<i64> {
    let free: Vec<usize> = (0..model.variables.len()).filter(|&v| model.variables[v].fixed.is_none()).collect();
    assert!(free.len() <= 22, "too many free variables for enumeration: {}", free.len());
    let mut values: Vec<bool> = model.variables.iter().map(|v| v.fixed.unwrap_or(false)).collect();
    let mut best: Option<i64> = None;
    for mask in 0u64..(1 << free.len()) {
        for (k, &v) in free.iter().enumerate() {
            values[v] = mask >> k & 1 == 1;
        }
        let feasible = model.rows.iter().all(|r| {
            let lhs: i64 = r.terms.iter().filter(|&&(v, _)| values[v]).map(|&(_, c)| c).sum();
            r.relation.holds(lhs, r.rhs)
        });
        if !feasible {
            continue;
        }
        let obj: i64 = model.objective.iter().filter(|&&(v, _)| values[v]).map(|&(_, c)| c).sum();
        best = Some(match (best, model.sense) {
            (None, _) => obj,
            (Some(b), Sense::Maximize) => b.max(obj),
            (Some(b), Sense::Minimize) => b.min(obj),
        });
    }
    best
}

fn grid_edges(n: usize) -> Vec<(usize, usize)> {
    let mut e = Vec::new();
    for r in 0..n {
        for c in 0..n {
            if c + 1 < n {
                e.push((r * n + c, r * n + c + 1));
            }
            if r + 1 < n {
                e.push((r * n + c, (r + 1) * n + c));
            }
        }
    }
    e
}

/// Over all edge subsets of the n×n grid where every vertex has degree 0 or
/// 2: the number forming one cycle, and the sum of 2^(number of cycles)
/// over all nonempty subsets (each cycle turns either way).
pub fn grid_cycle_census(n: usize) -> (u64, u64) {
    let edges = grid_edges(n);
    let cells = n * n;
    let (mut single, mut oriented) = (0u64, 0u64);
    let mut degree = vec![0u8; cells];
    for mask in 1u64..(1 << edges.len()) {
        degree.iter_mut().for_each(|d| *d = 0);
        let mut ok = true;
        for (k, &(a, b)) in edges.iter().enumerate() {
            if mask >> k & 1 == 1 {
                degree[a] += 1;
                degree[b] += 1;
                if degree[a] > 2 || degree[b] > 2 {
                    ok = false;
                    break;
                }
            }
        }
        if !ok || degree.contains(&1) {
            continue;
        }
        // Count components among touched vertices.
        let mut parent: Vec<usize> = (0..cells).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            p[x] = r;
            r
        }
        for (k, &(a, b)) in edges.iter().enumerate() {
            if mask >> k & 1 == 1 {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                parent[ra] = rb;
            }
        }
        let comps = (0..cells).filter(|&v| degree[v] == 2 && find(&mut parent, v) == v).count();
        if comps == 1 {
            single += 1;
        }
        oriented += 1 << comps;
    }
    (single, oriented)
}

/// Optimal 3×3 puzzle distances by plain breadth-first search from the
/// goal, with moves built from the edge-subset cycle census.
pub fn puzzle3_distances() -> HashMap<Vec<u8>, u8> {
    let edges = grid_edges(3);
    // Each move as a permutation: robot in cell c goes to perm[c].
    let mut moves: Vec<[usize; 9]> = Vec::new();
    for mask in 1u64..(1 << edges.len()) {
        let chosen: Vec<(usize, usize)> = (0..edges.len()).filter(|k| mask >> k & 1 == 1).map(|k| edges[k]).collect();
        let mut adj = vec![Vec::new(); 9];
        for &(a, b) in &chosen {
            adj[a].push(b);
            adj[b].push(a);
        }
        if adj.iter().any(|l| l.len() == 1 || l.len() > 2) {
            continue;
        }
        // Walk each cycle both ways; a move turns every cycle independently.
        let mut cycles: Vec<Vec<usize>> = Vec::new();
        let mut seen = [false; 9];
        for s in 0..9 {
            if adj[s].len() != 2 || seen[s] {
                continue;
            }
            let mut cyc = vec![s];
            seen[s] = true;
            let (mut prev, mut cur) = (s, adj[s][0]);
            while cur != s {
                seen[cur] = true;
                cyc.push(cur);
                let nxt = if adj[cur][0] == prev { adj[cur][1] } else { adj[cur][0] };
                prev = cur;
                cur = nxt;
            }
            cycles.push(cyc);
        }
        for dirs in 0u32..(1 << cycles.len()) {
            let mut perm: [usize; 9] = std::array::from_fn(|c| c);
            for (k, cyc) in cycles.iter().enumerate() {
                let len = cyc.len();
                for i in 0..len {
                    let to = if dirs >> k & 1 == 0 { cyc[(i + 1) % len] } else { cyc[(i + len - 1) % len] };
                    perm[cyc[i]] = to;
                }
            }
            moves.push(perm);
        }
    }
    let goal: Vec<u8> = (1..=9).collect();
    let mut dist = HashMap::from([(goal.clone(), 0u8)]);
    let mut queue = VecDeque::from([goal]);
    while let Some(s) = queue.pop_front() {
        let d = dist[&s];
        for perm in &moves {
            let mut next = vec![0u8; 9];
            for c in 0..9 {
                next[perm[c]] = s[c];
            }
            if !dist.contains_key(&next) {
                dist.insert(next.clone(), d + 1);
                queue.push_back(next);
            }
        }
    }
    dist
}

/// Checks a per-robot flow on a network by substitution: every arc within
/// capacity, every crossing bundle used at most once and every node
/// balanced for every robot. Returns the number of
/// violated conditions.
pub fn flow_violations(net: &mapf_core::expansion::TimeExpandedNetwork, flow: &mapf_core::expansion::Flow) -> usize {
    let arcs = net.arcs();
    let nodes = net.nodes().len();
    let mut bad = 0;
    let mut load = vec![0u32; arcs.len()];
    for robot in 1..=flow.robot_count() {
        let mut balance = vec![0i64; nodes];
        for &a in flow.arcs(robot) {
            load[a] += 1;
            balance[arcs[a].tail] -= 1;
            balance[arcs[a].head] += 1;
        }
        bad += balance.iter().filter(|&&b| b != 0).count();
    }
    bad += arcs.iter().zip(&load).filter(|(a, &l)| l > a.capacity).count();
    bad += net.bundles().iter().filter(|b| b.iter().map(|&a| load[a]).sum::<u32>() > 1).count();
    bad
}

/// Smallest total distance over plans of exactly `horizon` steps, or `None`.
pub fn joint_min_distance_at(instance: &MapfInstance, horizon: usize) -> Option<usize> {
    let mut layer: HashMap<Vec<VertexId>, usize> = HashMap::from([(instance.starts().to_vec(), 0)]);
    for _ in 0..horizon {
        let mut next_layer: HashMap<Vec<VertexId>, usize> = HashMap::new();
        for (pos, cost) in &layer {
            for next in joint_successors(instance, pos) {
                let c = cost + pos.iter().zip(&next).filter(|(a, b)| a != b).count();
                let e = next_layer.entry(next).or_insert(usize::MAX);
                *e = (*e).min(c);
            }
        }
        layer = next_layer;
    }
    layer.get(instance.goals()).copied()
}
