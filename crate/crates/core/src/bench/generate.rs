//! Random grid instances and the fixed example instances.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{grid_graph, Graph, MapfInstance, Variant};
use crate::puzzle::PuzzleState;

/// Attempts made by [`gen_grid_instance`] before giving up.
pub const GENERATION_ATTEMPTS: usize = 1000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenError {
    #[error("obstacle fraction {0} outside [0, 1)")]
    ObstacleFraction(f64),
    #[error("{robots} robots do not fit in {free} free cells")]
    TooManyRobots { robots: usize, free: usize },
    #[error("no connected placement found in {0} attempts")]
    Exhausted(usize),
    #[error("Fig. 1 needs an even line length of at least 2, got {0}")]
    OddLength(usize),
}

/// A `width`×`height` grid with `⌊obstacle_fraction·w·h⌋` random cells
/// removed and injective random starts and goals. Everything is redrawn
/// until all starts and goals share one connected component.
pub fn gen_grid_instance(width: usize, height: usize, obstacle_fraction: f64, robots: usize, seed: u64) -> Result<MapfInstance, GenError> {
    if !(0.0..1.0).contains(&obstacle_fraction) {
        return Err(GenError::ObstacleFraction(obstacle_fraction));
    }
    let cells = width * height;
    let removed_count = (obstacle_fraction * cells as f64).floor() as usize;
    let free = cells - removed_count;
    if robots > free || free == 0 {
        return Err(GenError::TooManyRobots { robots, free });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let all: Vec<(usize, usize)> = (0..height).flat_map(|y| (0..width).map(move |x| (x, y))).collect();
    for _ in 0..GENERATION_ATTEMPTS {
        let removed: BTreeSet<(usize, usize)> = all.choose_multiple(&mut rng, removed_count).copied().collect();
        let graph = grid_graph(width, height, &removed).expect("cells lie inside the grid");
        let vertices: Vec<usize> = (0..graph.vertex_count()).collect();
        let starts: Vec<usize> = vertices.choose_multiple(&mut rng, robots).copied().collect();
        let goals: Vec<usize> = vertices.choose_multiple(&mut rng, robots).copied().collect();
        let component = graph.components();
        let Some(&first) = starts.first() else {
            return Ok(MapfInstance::new(graph, starts, goals, Variant::ForbidHeadOn).expect("no robots"));
        };
        if starts.iter().chain(&goals).all(|&v| component[v] == component[first]) {
            return Ok(MapfInstance::new(graph, starts, goals, Variant::ForbidHeadOn).expect("injective by construction"));
        }
    }
    Err(GenError::Exhausted(GENERATION_ATTEMPTS))
}

/// Two robots that must pass each other between junctions `A` (vertex 0)
/// and `B` (vertex 1), joined by a straight line of length `t` and an arc of
/// length `1.5t`. Robot 1 starts on a spur at `A` and ends on a spur at
/// `B`; robot 2 does the reverse.
pub fn fig1_instance(t: usize) -> Result<MapfInstance, GenError> {
    if t < 2 || !t.is_multiple_of(2) {
        return Err(GenError::OddLength(t));
    }
    let arc = 3 * t / 2;
    let mut edges = Vec::new();
    let mut next = 2;
    for len in [t, arc] {
        let mut prev = 0;
        for _ in 1..len {
            edges.push((prev, next));
            prev = next;
            next += 1;
        }
        edges.push((prev, 1));
    }
    let (s1, g1, s2, g2) = (next, next + 1, next + 2, next + 3);
    edges.extend([(0, s1), (1, g1), (1, s2), (0, g2)]);
    let graph = Graph::new(next + 4, edges).expect("simple graph");
    Ok(MapfInstance::new(graph, vec![s1, s2], vec![g1, g2], Variant::ForbidHeadOn).expect("distinct spurs"))
}

/// The 9-puzzle start state of the worked example.
pub fn fig2_state() -> PuzzleState {
    PuzzleState::new(3, vec![9, 4, 1, 8, 2, 3, 6, 7, 5]).expect("permutation")
}

pub fn fig2_instance() -> MapfInstance {
    fig2_state().to_instance()
}
