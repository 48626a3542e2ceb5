use super::{Cycle, CycleMove, PuzzleError, Rotation};

/// Largest side whose cells fit the bit masks used below.
const MAX_SIDE: usize = 11;

fn check_side(n: usize) -> Result<(), PuzzleError> {
    if n < 2 {
        return Err(PuzzleError::TooSmall { n, min: 2 });
    }
    if n > MAX_SIDE {
        return Err(PuzzleError::Unsupported(n));
    }
    Ok(())
}

fn neighbors(n: usize, c: usize) -> impl Iterator<Item = usize> {
    let (r, col) = (c / n, c % n);
    let up = (r > 0).then(|| c - n);
    let left = (col > 0).then(|| c - 1);
    let right = (col + 1 < n).then_some(c + 1);
    let down = (r + 1 < n).then_some(c + n);
    [up, left, right, down].into_iter().flatten()
}

/// Every simple cycle of the n×n grid, once each, in canonical form and
/// sorted.
pub fn enumerate_cycles(n: usize) -> Result<Vec<Cycle>, PuzzleError> {
    check_side(n)?;
    let mut out = Vec::new();
    let mut on_path = vec![false; n * n];
    for s in 0..n * n {
        let mut path = vec![s];
        on_path[s] = true;
        extend(n, s, &mut path, &mut on_path, &mut out);
        on_path[s] = false;
    }
    out.sort();
    Ok(out)
}

/// Depth-first extension of a path that starts at its smallest cell `s`.
fn extend(n: usize, s: usize, path: &mut Vec<usize>, on_path: &mut [bool], out: &mut Vec<Cycle>) {
    let last = *path.last().unwrap();
    for next in neighbors(n, last) {
        if next == s {
            // Keep one of the two orientations.
            if path.len() >= 4 && path[1] < last {
                out.push(Cycle { cells: path.clone() });
            }
        } else if next > s && !on_path[next] {
            on_path[next] = true;
            path.push(next);
            extend(n, s, path, on_path, out);
            path.pop();
            on_path[next] = false;
        }
    }
}

fn mask(c: &Cycle) -> u128 {
    c.cells().iter().fold(0, |m, &x| m | 1 << x)
}

/// Every legal step: a non-empty set of disjoint cycles, each turned either
/// way.
pub fn all_moves(n: usize) -> Result<Vec<CycleMove>, PuzzleError> {
    let cycles = enumerate_cycles(n)?;
    let masks: Vec<u128> = cycles.iter().map(mask).collect();
    let mut out = Vec::new();
    let mut chosen = Vec::new();
    collect_moves(&cycles, &masks, 0, 0, &mut chosen, &mut out);
    Ok(out)
}

fn collect_moves(cycles: &[Cycle], masks: &[u128], from: usize, used: u128, chosen: &mut Vec<(Cycle, Rotation)>, out: &mut Vec<CycleMove>) {
    for j in from..cycles.len() {
        if masks[j] & used != 0 {
            continue;
        }
        for r in [Rotation::Forward, Rotation::Backward] {
            chosen.push((cycles[j].clone(), r));
            out.push(CycleMove { parts: chosen.clone() });
            collect_moves(cycles, masks, j + 1, used | masks[j], chosen, out);
            chosen.pop();
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BranchingCounts {
    pub cycles: usize,
    /// One cycle turned either way.
    pub single: u64,
    /// Unordered pairs of disjoint cycles.
    pub disjoint_pairs: u64,
    /// Single moves plus pairs of disjoint cycles with both directions each.
    pub up_to_pairs: u64,
    /// All non-empty sets of disjoint cycles with a direction per cycle.
    pub full: u64,
}

pub fn branching_counts(n: usize) -> Result<BranchingCounts, PuzzleError> {
    let cycles = enumerate_cycles(n)?;
    let masks: Vec<u128> = cycles.iter().map(mask).collect();
    let mut pairs = 0u64;
    for i in 0..masks.len() {
        for j in i + 1..masks.len() {
            if masks[i] & masks[j] == 0 {
                pairs += 1;
            }
        }
    }
    let single = 2 * cycles.len() as u64;
    Ok(BranchingCounts { cycles: cycles.len(), single, disjoint_pairs: pairs, up_to_pairs: single + 4 * pairs, full: count_sets(&masks, 0, 0) })
}

/// Weighted count of disjoint sets drawn from `masks[from..]`, each set
/// weighted by two to the power of its size.
fn count_sets(masks: &[u128], from: usize, used: u128) -> u64 {
    let mut total = 0;
    for j in from..masks.len() {
        if masks[j] & used == 0 {
            total += 2 * (1 + count_sets(masks, j + 1, used | masks[j]));
        }
    }
    total
}
