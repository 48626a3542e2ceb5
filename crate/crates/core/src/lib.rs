//! Optimal multi-robot path planning on graphs through time-expanded
//! network flow and 0/1 integer programming.

pub mod expansion;
pub mod graph;
pub mod ilp;
pub mod solver;
pub mod planner;
pub mod puzzle;
pub mod heuristic;
pub mod bench;
