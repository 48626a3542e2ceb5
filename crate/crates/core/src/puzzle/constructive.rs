//! Constructive (non-optimal) solver for any n ≥ 3.
//!
//! The top row and then the left column of the unsolved region are filled,
//! shrinking the region by one each round until a 3×3 block is left. A cell
//! is filled by a shortest sequence of 2×2 square rotations that touch no
//! filled cell, tracking only the robots being placed. The last two cells of
//! a row or column are filled together, which covers the case where the
//! final robot is stuck in the corner. The 3×3 block is finished by moving
//! its center robot in place and then sorting the ring with a three-move
//! exchange of two neighbouring ring cells, conjugated by ring rotations.

use std::collections::HashMap;
use std::collections::VecDeque;

use super::{apply_move, CycleMove, PuzzleError, PuzzleState};

fn cell(n: usize, r: usize, c: usize) -> usize {
    r * n + c
}

struct Builder {
    n: usize,
    state: PuzzleState,
    moves: Vec<CycleMove>,
    fixed: Vec<bool>,
}

impl Builder {
    fn play(&mut self, m: CycleMove) {
        self.state = apply_move(&self.state, &m).expect("moves stay on the grid");
        if self.moves.last() == Some(&m.inverse()) {
            self.moves.pop();
        } else {
            self.moves.push(m);
        }
    }

    fn along(&self, cells: &[usize]) -> CycleMove {
        CycleMove::along(self.n, cells).expect("cells form a grid cycle")
    }

    /// Both rotations of every 2×2 square whose cells are all unfilled.
    fn free_squares(&self) -> Vec<(CycleMove, Vec<(usize, usize)>)> {
        let n = self.n;
        let mut out = Vec::new();
        for r in 0..n - 1 {
            for c in 0..n - 1 {
                let sq = [cell(n, r, c), cell(n, r, c + 1), cell(n, r + 1, c + 1), cell(n, r + 1, c)];
                if sq.iter().any(|&x| self.fixed[x]) {
                    continue;
                }
                for m in [self.along(&sq), self.along(&sq).inverse()] {
                    let steps = m.steps().collect();
                    out.push((m, steps));
                }
            }
        }
        out
    }

    /// Brings each `(robot, target)` robot to its target together, then
    /// marks the targets filled.
    fn place(&mut self, jobs: &[(usize, usize)]) {
        let squares = self.free_squares();
        let start: Vec<usize> = jobs.iter().map(|&(r, _)| self.state.position_of(r).expect("robot on board")).collect();
        let goal: Vec<usize> = jobs.iter().map(|&(_, t)| t).collect();
        let mut parent: HashMap<Vec<usize>, Option<(Vec<usize>, usize)>> = HashMap::from([(start.clone(), None)]);
        let mut queue = VecDeque::from([start]);
        while let Some(pos) = queue.pop_front() {
            if pos == goal {
                break;
            }
            for (k, (_, steps)) in squares.iter().enumerate() {
                let next: Vec<usize> = pos.iter().map(|&p| steps.iter().find(|&&(f, _)| f == p).map_or(p, |&(_, t)| t)).collect();
                if !parent.contains_key(&next) {
                    parent.insert(next.clone(), Some((pos.clone(), k)));
                    queue.push_back(next);
                }
            }
        }
        let mut path = Vec::new();
        let mut at = goal.clone();
        while let Some(Some((prev, k))) = parent.get(&at) {
            path.push(*k);
            at = prev.clone();
        }
        assert!(parent.contains_key(&goal), "placement of {:?} unreachable", jobs);
        for k in path.into_iter().rev() {
            self.play(squares[k].0.clone());
        }
        for &t in &goal {
            self.fixed[t] = true;
        }
    }

    /// Fills a line of cells: all but the last two one by one, then the
    /// last two together.
    fn fill_line(&mut self, cells: &[usize]) {
        let split = cells.len() - 2;
        for &c in &cells[..split] {
            self.place(&[(c + 1, c)]);
        }
        self.place(&[(cells[split] + 1, cells[split]), (cells[split + 1] + 1, cells[split + 1])]);
    }

    /// Solves the 3×3 block whose top-left cell is `(b, b)`.
    fn finish_block(&mut self, b: usize) {
        let n = self.n;
        let g = |r: usize, c: usize| cell(n, b + r, b + c);
        let center = g(1, 1);
        self.place(&[(center + 1, center)]);

        let ring = [g(0, 0), g(0, 1), g(0, 2), g(1, 2), g(2, 2), g(2, 1), g(2, 0), g(1, 0)];
        let turn = self.along(&ring);
        // Swaps the robots in ring[4] and ring[5] and leaves every other cell alone.
        let exchange = [
            self.along(&[g(0, 0), g(0, 1), g(0, 2), g(1, 2), g(2, 2), g(2, 1), g(1, 1), g(1, 0)]),
            self.along(&[g(1, 0), g(1, 1), g(2, 1), g(2, 0)]),
            self.along(&[g(1, 0), g(2, 0), g(2, 1), g(2, 2), g(1, 2), g(0, 2), g(0, 1), g(0, 0)]),
        ];
        let slot = |robot: usize| ring.iter().position(|&c| c + 1 == robot).expect("ring robots belong on the ring");
        let mut order: Vec<usize> = ring.iter().map(|&c| slot(self.state.cells()[c])).collect();
        for pass in 0..ring.len() {
            for i in 0..ring.len() - 1 - pass {
                if order[i] < order[i + 1] {
                    continue;
                }
                let shift = (4 + ring.len() - i) % ring.len();
                let (there, back) = if shift <= 4 { (turn.clone(), turn.inverse()) } else { (turn.inverse(), turn.clone()) };
                let steps = shift.min(ring.len() - shift);
                for _ in 0..steps {
                    self.play(there.clone());
                }
                for m in &exchange {
                    self.play(m.clone());
                }
                for _ in 0..steps {
                    self.play(back.clone());
                }
                order.swap(i, i + 1);
            }
        }
    }
}

/// A legal move sequence taking `start` to row-major order.
pub fn constructive_solve(start: &PuzzleState) -> Result<Vec<CycleMove>, PuzzleError> {
    let n = start.side();
    if n < 3 {
        return Err(PuzzleError::TooSmall { n, min: 3 });
    }
    let mut b = Builder { n, state: start.clone(), moves: Vec::new(), fixed: vec![false; n * n] };
    for o in 0..n - 3 {
        let row: Vec<usize> = (o..n).map(|c| cell(n, o, c)).collect();
        b.fill_line(&row);
        let column: Vec<usize> = (o + 1..n).map(|r| cell(n, r, o)).collect();
        b.fill_line(&column);
    }
    b.finish_block(n - 3);
    debug_assert!(b.state.is_goal(), "{}", b.state.board());
    Ok(b.moves)
}
