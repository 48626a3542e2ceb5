//! The n²-puzzle: an n×n grid fully occupied by robots, where a step rotates
//! robots along one or more vertex-disjoint cycles of the grid.
//!
//! Cells are numbered row-major, `row * n + col`, which matches the vertex
//! numbering of [`grid_graph`]. Robots are `1..=n²` and the goal puts robot
//! `k` in cell `k - 1`.

mod bfs;
mod constructive;
mod cycles;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{grid_graph, MapfInstance, Solution, Variant};

pub use bfs::{bfs_distance, bfs_solve, depth_histogram};
pub use constructive::constructive_solve;
pub use cycles::{all_moves, branching_counts, enumerate_cycles, BranchingCounts};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PuzzleError {
    #[error("side length must be at least {min}, got {n}")]
    TooSmall { n: usize, min: usize },
    #[error("cells are not a permutation of 1..={0}")]
    NotPermutation(usize),
    #[error("expected {expected} cells, got {got}")]
    CellCount { expected: usize, got: usize },
    #[error("cell sequence {0:?} is not a simple cycle of the grid")]
    NotACycle(Vec<usize>),
    #[error("cycles of a move share cell {0}")]
    Overlapping(usize),
    #[error("move uses cell {cell} outside a {n}x{n} puzzle")]
    OutOfRange { cell: usize, n: usize },
    #[error("exhaustive search is only available for n = 3, got n = {0}")]
    Unsupported(usize),
    #[error("step {step} is not a rotation of disjoint grid cycles")]
    NotAMove { step: usize },
    #[error("parse error: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PuzzleState {
    n: usize,
    cells: Vec<usize>,
}

impl PuzzleState {
    pub fn new(n: usize, cells: Vec<usize>) -> Result<Self, PuzzleError> {
        if n < 2 {
            return Err(PuzzleError::TooSmall { n, min: 2 });
        }
        if cells.len() != n * n {
            return Err(PuzzleError::CellCount { expected: n * n, got: cells.len() });
        }
        let mut seen = vec![false; n * n + 1];
        for &r in &cells {
            if r == 0 || r > n * n || seen[r] {
                return Err(PuzzleError::NotPermutation(n * n));
            }
            seen[r] = true;
        }
        Ok(PuzzleState { n, cells })
    }

    /// Row-major order.
    pub fn goal(n: usize) -> Self {
        PuzzleState { n, cells: (1..=n * n).collect() }
    }

    pub fn side(&self) -> usize {
        self.n
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    pub fn is_goal(&self) -> bool {
        self.cells.iter().enumerate().all(|(c, &r)| r == c + 1)
    }

    pub fn position_of(&self, robot: usize) -> Option<usize> {
        self.cells.iter().position(|&r| r == robot)
    }

    /// Multi-line board, one row per line.
    pub fn board(&self) -> String {
        let width = (self.n * self.n).to_string().len();
        let mut out = String::new();
        for row in self.cells.chunks(self.n) {
            let line: Vec<String> = row.iter().map(|r| format!("{:>width$}", r)).collect();
            out += &line.join(" ");
            out.push('\n');
        }
        out
    }

    /// The MAPF instance on the `n`×`n` grid with this state as the start
    /// and row-major order as the goal.
    pub fn to_instance(&self) -> MapfInstance {
        let graph = grid_graph(self.n, self.n, &BTreeSet::new()).expect("non-empty grid");
        let mut starts = vec![0; self.cells.len()];
        for (c, &r) in self.cells.iter().enumerate() {
            starts[r - 1] = c;
        }
        MapfInstance::new(graph, starts, (0..self.cells.len()).collect(), Variant::ForbidHeadOn).expect("permutation is injective")
    }
}

impl fmt::Display for PuzzleState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.n)?;
        for r in &self.cells {
            write!(f, " {}", r)?;
        }
        Ok(())
    }
}

impl FromStr for PuzzleState {
    type Err = PuzzleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut nums = s.split_whitespace().map(|t| t.parse::<usize>().map_err(|_| PuzzleError::Parse(format!("not a number: {}", t))));
        let n = nums.next().ok_or_else(|| PuzzleError::Parse("empty input".into()))??;
        let cells = nums.collect::<Result<Vec<_>, _>>()?;
        PuzzleState::new(n, cells)
    }
}

/// Uniform random state, fixed by the seed.
pub fn random_state(n: usize, seed: u64) -> Result<PuzzleState, PuzzleError> {
    if n < 2 {
        return Err(PuzzleError::TooSmall { n, min: 2 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cells: Vec<usize> = (1..=n * n).collect();
    cells.shuffle(&mut rng);
    Ok(PuzzleState { n, cells })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rotation {
    /// Each robot moves to the next cell of the canonical sequence.
    Forward,
    Backward,
}

impl Rotation {
    pub fn reversed(self) -> Rotation {
        match self {
            Rotation::Forward => Rotation::Backward,
            Rotation::Backward => Rotation::Forward,
        }
    }
}

/// A simple grid cycle in canonical form: the lexicographically smallest of
/// its cell sequences over all starting points and both orientations.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cycle {
    cells: Vec<usize>,
}

fn adjacent(n: usize, a: usize, b: usize) -> bool {
    let (ra, ca, rb, cb) = (a / n, a % n, b / n, b % n);
    ra.abs_diff(rb) + ca.abs_diff(cb) == 1
}

impl Cycle {
    /// Canonical cycle through `cells` in the given cyclic order, and the
    /// rotation that moves robots along that order.
    pub fn from_sequence(n: usize, cells: &[usize]) -> Result<(Cycle, Rotation), PuzzleError> {
        let bad = || PuzzleError::NotACycle(cells.to_vec());
        let len = cells.len();
        if len < 4 || cells.iter().any(|&c| c >= n * n) || cells.iter().collect::<BTreeSet<_>>().len() != len {
            return Err(bad());
        }
        if !(0..len).all(|k| adjacent(n, cells[k], cells[(k + 1) % len])) {
            return Err(bad());
        }
        let start = (0..len).min_by_key(|&k| cells[k]).unwrap();
        let forward: Vec<usize> = (0..len).map(|k| cells[(start + k) % len]).collect();
        let backward: Vec<usize> = (0..len).map(|k| cells[(start + len - k) % len]).collect();
        Ok(if forward <= backward {
            (Cycle { cells: forward }, Rotation::Forward)
        } else {
            (Cycle { cells: backward }, Rotation::Backward)
        })
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// The rotation that turns robots clockwise as seen with row 0 on top.
    pub fn clockwise(&self, n: usize) -> Rotation {
        let len = self.cells.len();
        let mut area = 0i64;
        for k in 0..len {
            let (a, b) = (self.cells[k], self.cells[(k + 1) % len]);
            let (xa, ya, xb, yb) = ((a % n) as i64, (a / n) as i64, (b % n) as i64, (b / n) as i64);
            area += xa * yb - xb * ya;
        }
        // Rows grow downwards, so a positive shoelace sum is clockwise on screen.
        if area > 0 {
            Rotation::Forward
        } else {
            Rotation::Backward
        }
    }

    /// `(from, to)` cell pairs of one rotation step.
    pub fn steps(&self, rotation: Rotation) -> impl Iterator<Item = (usize, usize)> + '_ {
        let len = self.cells.len();
        (0..len).map(move |k| match rotation {
            Rotation::Forward => (self.cells[k], self.cells[(k + 1) % len]),
            Rotation::Backward => (self.cells[k], self.cells[(k + len - 1) % len]),
        })
    }
}

/// One synchronous step: rotations along pairwise vertex-disjoint cycles.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CycleMove {
    parts: Vec<(Cycle, Rotation)>,
}

impl CycleMove {
    pub fn new(mut parts: Vec<(Cycle, Rotation)>) -> Result<Self, PuzzleError> {
        let mut used = BTreeSet::new();
        for (c, _) in &parts {
            for &cell in c.cells() {
                if !used.insert(cell) {
                    return Err(PuzzleError::Overlapping(cell));
                }
            }
        }
        parts.sort();
        Ok(CycleMove { parts })
    }

    pub fn single(cycle: Cycle, rotation: Rotation) -> Self {
        CycleMove { parts: vec![(cycle, rotation)] }
    }

    /// Robots at `cells[k]` move to `cells[k + 1]`, wrapping around.
    pub fn along(n: usize, cells: &[usize]) -> Result<Self, PuzzleError> {
        let (c, r) = Cycle::from_sequence(n, cells)?;
        Ok(CycleMove::single(c, r))
    }

    pub fn parts(&self) -> &[(Cycle, Rotation)] {
        &self.parts
    }

    pub fn inverse(&self) -> CycleMove {
        CycleMove { parts: self.parts.iter().map(|(c, r)| (c.clone(), r.reversed())).collect() }
    }

    /// `(from, to)` for every robot that moves.
    pub fn steps(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.parts.iter().flat_map(|(c, r)| c.steps(*r))
    }
}

impl fmt::Display for CycleMove {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, (c, r)) in self.parts.iter().enumerate() {
            if k > 0 {
                write!(f, " | ")?;
            }
            let cells: Vec<String> = c.cells().iter().map(|x| x.to_string()).collect();
            let dir = match r {
                Rotation::Forward => "+",
                Rotation::Backward => "-",
            };
            write!(f, "{}({})", dir, cells.join(" "))?;
        }
        Ok(())
    }
}

pub fn apply_move(state: &PuzzleState, mv: &CycleMove) -> Result<PuzzleState, PuzzleError> {
    let n = state.n;
    let mut used = BTreeSet::new();
    for (c, _) in &mv.parts {
        for &cell in c.cells() {
            if cell >= n * n {
                return Err(PuzzleError::OutOfRange { cell, n });
            }
            if !used.insert(cell) {
                return Err(PuzzleError::Overlapping(cell));
            }
        }
        if !(0..c.len()).all(|k| adjacent(n, c.cells[k], c.cells[(k + 1) % c.len()])) {
            return Err(PuzzleError::NotACycle(c.cells.clone()));
        }
    }
    let mut cells = state.cells.clone();
    for (from, to) in mv.steps() {
        cells[to] = state.cells[from];
    }
    Ok(PuzzleState { n, cells })
}

pub fn apply_moves(state: &PuzzleState, moves: &[CycleMove]) -> Result<PuzzleState, PuzzleError> {
    moves.iter().try_fold(state.clone(), |s, m| apply_move(&s, m))
}

/// Paths of every robot while the moves are played from `start`.
pub fn moves_to_solution(start: &PuzzleState, moves: &[CycleMove]) -> Result<Solution, PuzzleError> {
    let cells = start.cells.len();
    let mut paths = vec![Vec::with_capacity(moves.len() + 1); cells];
    let mut state = start.clone();
    for step in 0..=moves.len() {
        for (c, &r) in state.cells.iter().enumerate() {
            paths[r - 1].push(c);
        }
        if step < moves.len() {
            state = apply_move(&state, &moves[step])?;
        }
    }
    Ok(Solution::new(paths).expect("equal-length paths"))
}

/// Recovers the moves of a solution on a fully occupied grid. Every step
/// must permute the moving robots along disjoint grid cycles.
pub fn solution_to_moves(start: &PuzzleState, solution: &Solution) -> Result<Vec<CycleMove>, PuzzleError> {
    let n = start.n;
    let cells = n * n;
    if solution.robot_count() != cells {
        return Err(PuzzleError::CellCount { expected: cells, got: solution.robot_count() });
    }
    let mut moves = Vec::with_capacity(solution.horizon());
    for step in 0..solution.horizon() {
        let bad = || PuzzleError::NotAMove { step };
        let before = solution.configuration(step);
        let after = solution.configuration(step + 1);
        let mut next = vec![None; cells];
        for (&a, &b) in before.iter().zip(&after) {
            if a >= cells || b >= cells {
                return Err(bad());
            }
            if a != b {
                next[a] = Some(b);
            }
        }
        let mut seen = vec![false; cells];
        let mut parts = Vec::new();
        for s in 0..cells {
            if seen[s] || next[s].is_none() {
                continue;
            }
            let mut seq = vec![s];
            seen[s] = true;
            let mut cur = next[s].unwrap();
            while cur != s {
                if seen[cur] {
                    return Err(bad());
                }
                seen[cur] = true;
                seq.push(cur);
                cur = next[cur].ok_or_else(bad)?;
            }
            let (c, r) = Cycle::from_sequence(n, &seq).map_err(|_| bad())?;
            parts.push((c, r));
        }
        moves.push(CycleMove::new(parts).map_err(|_| bad())?);
    }
    Ok(moves)
}
