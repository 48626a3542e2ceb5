//! Instance generation, file formats and the benchmark harness.

pub mod formats;
pub mod generate;
pub mod harness;

pub use formats::{parse_instance, parse_solution, write_instance, write_solution, FormatError};
pub use generate::{fig1_instance, fig2_instance, fig2_state, gen_grid_instance, GenError};
pub use harness::{
    expand_runs, instance_hash, records_to_jsonl, render_table, run_algorithm, run_benchmark, Algorithm, AlgorithmRun, BenchError, BenchRecord, BenchSpec, GridSweep,
    InstanceParams, RunOutcome,
};
