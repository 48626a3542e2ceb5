//! Exhaustive breadth-first search over all 9! states of the 9-puzzle.
//!
//! One distance table, built on first use, serves every query. Moves are
//! closed under inversion, so the distance from the goal to a state equals
//! the distance from the state to the goal.

use std::collections::VecDeque;
use std::sync::OnceLock;

use super::{all_moves, CycleMove, PuzzleError, PuzzleState};

const CELLS: usize = 9;
const STATES: usize = 362_880;
const UNSEEN: u8 = u8::MAX;

struct Table {
    moves: Vec<CycleMove>,
    /// `targets[m][c]` is where move `m` sends the robot in cell `c`.
    targets: Vec<[u8; CELLS]>,
    distance: Vec<u8>,
}

fn rank(cells: &[u8; CELLS]) -> usize {
    let mut r = 0;
    for i in 0..CELLS {
        let smaller_after = cells[i + 1..].iter().filter(|&&x| x < cells[i]).count();
        r = r * (CELLS - i) + smaller_after;
    }
    r
}

fn unrank(mut r: usize) -> [u8; CELLS] {
    let mut digits = [0usize; CELLS];
    for i in (0..CELLS).rev() {
        digits[i] = r % (CELLS - i);
        r /= CELLS - i;
    }
    let mut pool: Vec<u8> = (0..CELLS as u8).collect();
    let mut cells = [0u8; CELLS];
    for i in 0..CELLS {
        cells[i] = pool.remove(digits[i]);
    }
    cells
}

fn table() -> &'static Table {
    static TABLE: OnceLock<Table> = OnceLock::new();
    TABLE.get_or_init(|| {
        let moves = all_moves(3).expect("n = 3 is supported");
        let targets: Vec<[u8; CELLS]> = moves
            .iter()
            .map(|m| {
                let mut t: [u8; CELLS] = std::array::from_fn(|c| c as u8);
                for (from, to) in m.steps() {
                    t[from] = to as u8;
                }
                t
            })
            .collect();
        let mut distance = vec![UNSEEN; STATES];
        let goal: [u8; CELLS] = std::array::from_fn(|c| c as u8);
        distance[rank(&goal)] = 0;
        let mut queue = VecDeque::from([rank(&goal) as u32]);
        while let Some(r) = queue.pop_front() {
            let cells = unrank(r as usize);
            let d = distance[r as usize];
            for t in &targets {
                let mut next = [0u8; CELLS];
                for c in 0..CELLS {
                    next[t[c] as usize] = cells[c];
                }
                let nr = rank(&next);
                if distance[nr] == UNSEEN {
                    distance[nr] = d + 1;
                    queue.push_back(nr as u32);
                }
            }
        }
        Table { moves, targets, distance }
    })
}

fn encode(state: &PuzzleState) -> Result<[u8; CELLS], PuzzleError> {
    if state.side() != 3 {
        return Err(PuzzleError::Unsupported(state.side()));
    }
    Ok(std::array::from_fn(|c| (state.cells()[c] - 1) as u8))
}

/// Minimum number of steps from `state` to row-major order.
pub fn bfs_distance(state: &PuzzleState) -> Result<usize, PuzzleError> {
    let cells = encode(state)?;
    Ok(usize::from(table().distance[rank(&cells)]))
}

/// A shortest move sequence to row-major order. Among optimal first moves
/// the earliest in move order is taken at every step.
pub fn bfs_solve(start: &PuzzleState) -> Result<Vec<CycleMove>, PuzzleError> {
    let t = table();
    let mut cells = encode(start)?;
    let mut d = t.distance[rank(&cells)];
    let mut out = Vec::with_capacity(usize::from(d));
    while d > 0 {
        let (m, next) = t
            .targets
            .iter()
            .enumerate()
            .map(|(m, tg)| {
                let mut next = [0u8; CELLS];
                for c in 0..CELLS {
                    next[tg[c] as usize] = cells[c];
                }
                (m, next)
            })
            .find(|(_, next)| t.distance[rank(next)] == d - 1)
            .expect("a neighbour one step closer exists");
        out.push(t.moves[m].clone());
        cells = next;
        d -= 1;
    }
    debug_assert!(super::apply_moves(start, &out).map(|s| s.is_goal()).unwrap_or(false));
    Ok(out)
}

/// Number of states at each distance from the goal.
pub fn depth_histogram() -> Vec<usize> {
    let t = table();
    let max = t.distance.iter().copied().max().unwrap_or(0);
    let mut h = vec![0; usize::from(max) + 1];
    for &d in &t.distance {
        h[usize::from(d)] += 1;
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::puzzle::apply_move;

    #[test]
    fn rank_round_trip() {
        for r in [0, 1, 5000, STATES - 1] {
            assert_eq!(rank(&unrank(r)), r);
        }
    }

    #[test]
    fn goal_and_one_step() {
        let goal = PuzzleState::goal(3);
        assert_eq!(bfs_distance(&goal).unwrap(), 0);
        assert!(bfs_solve(&goal).unwrap().is_empty());
        let m = &all_moves(3).unwrap()[5];
        let s = apply_move(&goal, m).unwrap();
        assert_eq!(bfs_distance(&s).unwrap(), 1);
        assert_eq!(bfs_solve(&s).unwrap(), vec![m.inverse()]);
        assert_eq!(bfs_distance(&PuzzleState::goal(4)), Err(PuzzleError::Unsupported(4)));
    }

    #[test]
    fn every_state_is_reached() {
        let h = depth_histogram();
        assert_eq!(h.iter().sum::<usize>(), STATES);
        assert_eq!(h[0], 1);
        assert_eq!(h[1], 26);
    }
}
