//! Line-oriented text formats for instances and solutions.
//!
//! ```text
//! mapf 1
//! variant forbid-head-on
//! vertices 3
//! coord 0 0 0
//! edges 2
//! e 0 1
//! e 1 2
//! robots 1
//! r 1 0 2
//! ```
//!
//! `#` starts a comment. Coordinates are all-or-nothing. Diagonal pairs of
//! the `grid-diagonal` variant are given as `diagonal v1 v3 v2 v4`.
//! Solutions are `solution <n> <T>` followed by `p <i> <v0> ... <vT>` for
//! every robot.

use std::fmt::Write as _;

use thiserror::Error;

use crate::graph::{DiagonalPair, Graph, GraphError, MapfInstance, Solution, Variant};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct FormatError {
    /// 1-based; 0 when the problem is not tied to one line.
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> FormatError {
    FormatError { line, message: message.into() }
}

/// Non-empty lines with comments stripped, numbered from 1.
fn lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let body = raw.split('#').next().unwrap_or("");
        let fields: Vec<&str> = body.split_whitespace().collect();
        (!fields.is_empty()).then_some((i + 1, fields))
    })
}

fn num<T: std::str::FromStr>(line: usize, s: &str) -> Result<T, FormatError> {
    s.parse().map_err(|_| err(line, format!("expected a number, found {:?}", s)))
}

fn arity(line: usize, fields: &[&str], n: usize) -> Result<(), FormatError> {
    if fields.len() != n + 1 {
        return Err(err(line, format!("{} takes {} values, found {}", fields[0], n, fields.len() - 1)));
    }
    Ok(())
}

pub fn write_instance(instance: &MapfInstance) -> String {
    let g = &instance.graph;
    let mut out = String::from("mapf 1\n");
    writeln!(out, "variant {}", instance.variant.name()).unwrap();
    for d in instance.variant.diagonals() {
        writeln!(out, "diagonal {} {} {} {}", d.first.0, d.first.1, d.second.0, d.second.1).unwrap();
    }
    writeln!(out, "vertices {}", g.vertex_count()).unwrap();
    if let Some(coords) = g.coords() {
        for (v, (x, y)) in coords.iter().enumerate() {
            writeln!(out, "coord {} {} {}", v, x, y).unwrap();
        }
    }
    writeln!(out, "edges {}", g.edge_count()).unwrap();
    for (a, b) in g.edges() {
        writeln!(out, "e {} {}", a, b).unwrap();
    }
    writeln!(out, "robots {}", instance.robot_count()).unwrap();
    for i in instance.robots() {
        writeln!(out, "r {} {} {}", i, instance.start(i), instance.goal(i)).unwrap();
    }
    out
}

pub fn parse_instance(text: &str) -> Result<MapfInstance, FormatError> {
    let mut it = lines(text);
    match it.next() {
        Some((_, f)) if f == ["mapf", "1"] => {}
        Some((line, _)) => return Err(err(line, "expected header `mapf 1`")),
        None => return Err(err(0, "empty input")),
    }
    let mut variant_name: Option<(usize, String)> = None;
    let mut diagonals = Vec::new();
    let mut vertices: Option<usize> = None;
    let mut coords: Vec<Option<(i64, i64)>> = Vec::new();
    let mut coord_lines = 0;
    let mut declared_edges: Option<(usize, usize)> = None;
    let mut edges = Vec::new();
    let mut declared_robots: Option<(usize, usize)> = None;
    let mut robots: Vec<Option<(usize, usize)>> = Vec::new();
    let need_vertices = |line: usize, vertices: Option<usize>| vertices.ok_or_else(|| err(line, "`vertices` must come first"));
    for (line, f) in it {
        match f[0] {
            "variant" => {
                arity(line, &f, 1)?;
                variant_name = Some((line, f[1].to_string()));
            }
            "diagonal" => {
                arity(line, &f, 4)?;
                let v: Vec<usize> = f[1..].iter().map(|s| num(line, s)).collect::<Result<_, _>>()?;
                diagonals.push(DiagonalPair { first: (v[0], v[1]), second: (v[2], v[3]) });
            }
            "vertices" => {
                arity(line, &f, 1)?;
                if vertices.is_some() {
                    return Err(err(line, "duplicate `vertices`"));
                }
                let k = num(line, f[1])?;
                vertices = Some(k);
                coords = vec![None; k];
            }
            "coord" => {
                arity(line, &f, 3)?;
                let k = need_vertices(line, vertices)?;
                let v: usize = num(line, f[1])?;
                if v >= k {
                    return Err(err(line, format!("vertex {} out of range", v)));
                }
                if coords[v].replace((num(line, f[2])?, num(line, f[3])?)).is_some() {
                    return Err(err(line, format!("duplicate coordinates for vertex {}", v)));
                }
                coord_lines += 1;
            }
            "edges" => {
                arity(line, &f, 1)?;
                declared_edges = Some((line, num(line, f[1])?));
            }
            "e" => {
                arity(line, &f, 2)?;
                let k = need_vertices(line, vertices)?;
                let (a, b): (usize, usize) = (num(line, f[1])?, num(line, f[2])?);
                if a >= k || b >= k {
                    return Err(err(line, format!("edge {}-{} uses a missing vertex", a, b)));
                }
                edges.push((line, a, b));
            }
            "robots" => {
                arity(line, &f, 1)?;
                let n = num(line, f[1])?;
                declared_robots = Some((line, n));
                robots = vec![None; n];
            }
            "r" => {
                arity(line, &f, 3)?;
                let Some((_, n)) = declared_robots else { return Err(err(line, "`robots` must come before `r`")) };
                let i: usize = num(line, f[1])?;
                if i == 0 || i > n {
                    return Err(err(line, format!("robot {} outside 1..={}", i, n)));
                }
                if robots[i - 1].replace((num(line, f[2])?, num(line, f[3])?)).is_some() {
                    return Err(err(line, format!("robot {} given twice", i)));
                }
            }
            other => return Err(err(line, format!("unknown directive {:?}", other))),
        }
    }
    let k = vertices.ok_or_else(|| err(0, "missing `vertices`"))?;
    let (eline, m) = declared_edges.ok_or_else(|| err(0, "missing `edges`"))?;
    if m != edges.len() {
        return Err(err(eline, format!("{} edges declared, {} given", m, edges.len())));
    }
    let (rline, _) = declared_robots.ok_or_else(|| err(0, "missing `robots`"))?;
    let mut graph = Graph::new(k, edges.iter().map(|&(_, a, b)| (a, b))).map_err(|e| {
        let culprit = |x: usize, y: usize| edges.iter().rev().find(|&&(_, a, b)| (a.min(b), a.max(b)) == (x.min(y), x.max(y))).map(|&(l, _, _)| l);
        let line = match e {
            GraphError::SelfLoop(v) => culprit(v, v),
            GraphError::DuplicateEdge(a, b) => culprit(a, b),
            _ => None,
        };
        err(line.unwrap_or(eline), e.to_string())
    })?;
    if coord_lines > 0 {
        if coord_lines != k {
            return Err(err(0, format!("coordinates for {} of {} vertices", coord_lines, k)));
        }
        graph = graph.with_coords(coords.into_iter().map(|c| c.unwrap()).collect()).map_err(|e| err(0, e.to_string()))?;
    }
    let variant = match variant_name.as_ref().map(|(l, s)| (*l, s.as_str())) {
        None | Some((_, "forbid-head-on")) => Variant::ForbidHeadOn,
        Some((_, "allow-head-on")) => Variant::AllowHeadOn,
        Some((_, "grid-diagonal")) => Variant::GridDiagonal(diagonals.clone()),
        Some((l, other)) => return Err(err(l, format!("unknown variant {:?}", other))),
    };
    if !diagonals.is_empty() && !matches!(variant, Variant::GridDiagonal(_)) {
        return Err(err(0, "diagonal pairs need variant grid-diagonal"));
    }
    let mut starts = Vec::with_capacity(robots.len());
    let mut goals = Vec::with_capacity(robots.len());
    for (i, r) in robots.iter().enumerate() {
        let (s, g) = r.ok_or_else(|| err(rline, format!("robot {} missing", i + 1)))?;
        starts.push(s);
        goals.push(g);
    }
    MapfInstance::new(graph, starts, goals, variant).map_err(|e| err(rline, e.to_string()))
}

pub fn write_solution(solution: &Solution) -> String {
    let mut out = String::new();
    writeln!(out, "solution {} {}", solution.robot_count(), solution.horizon()).unwrap();
    for (i, path) in solution.paths().iter().enumerate() {
        write!(out, "p {}", i + 1).unwrap();
        for v in path {
            write!(out, " {}", v).unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn parse_solution(text: &str) -> Result<Solution, FormatError> {
    let mut it = lines(text);
    let (hline, (n, t)) = match it.next() {
        Some((line, f)) if f[0] == "solution" => {
            arity(line, &f, 2)?;
            (line, (num::<usize>(line, f[1])?, num::<usize>(line, f[2])?))
        }
        Some((line, _)) => return Err(err(line, "expected header `solution <n> <T>`")),
        None => return Err(err(0, "empty input")),
    };
    let mut paths: Vec<Option<Vec<usize>>> = vec![None; n];
    for (line, f) in it {
        if f[0] != "p" {
            return Err(err(line, format!("unknown directive {:?}", f[0])));
        }
        arity(line, &f, t + 2)?;
        let i: usize = num(line, f[1])?;
        if i == 0 || i > n {
            return Err(err(line, format!("robot {} outside 1..={}", i, n)));
        }
        let path = f[2..].iter().map(|s| num(line, s)).collect::<Result<Vec<usize>, _>>()?;
        if paths[i - 1].replace(path).is_some() {
            return Err(err(line, format!("robot {} given twice", i)));
        }
    }
    let paths = paths
        .into_iter()
        .enumerate()
        .map(|(i, p)| p.ok_or_else(|| err(hline, format!("robot {} missing", i + 1))))
        .collect::<Result<Vec<_>, _>>()?;
    Solution::new(paths).map_err(|e| err(hline, e.to_string()))
}
