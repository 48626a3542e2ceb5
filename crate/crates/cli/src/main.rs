use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use mapf_core::bench::{
    fig1_instance, fig2_instance, gen_grid_instance, parse_instance, parse_solution, records_to_jsonl, render_table, run_algorithm, write_instance,
    write_solution, Algorithm, BenchSpec, RunOutcome,
};
use mapf_core::expansion::{expand, CostProfile};
use mapf_core::graph::{validate_solution, MapfInstance, Variant};
use mapf_core::ilp::{build_dompp_model, build_tompp_model, export_lp};
use mapf_core::planner::PlannerConfig;
use mapf_core::puzzle::{
    apply_moves, bfs_solve, branching_counts, constructive_solve, enumerate_cycles, moves_to_solution, random_state, PuzzleState,
};

const SOLVED: u8 = 0;
const INVALID: u8 = 1;
const UNSOLVABLE: u8 = 2;
const LIMIT: u8 = 3;
const INPUT_ERROR: u8 = 4;

#[derive(Parser)]
#[command(name = "mapf", version, about = "Optimal multi-robot path planning on graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a random grid instance or a fixed example.
    Gen(GenArgs),
    /// Plan paths for an instance file.
    Solve(SolveArgs),
    /// Check a solution file against an instance file.
    Validate { instance: PathBuf, solution: PathBuf },
    /// Grid puzzles where every cell holds a robot.
    #[command(subcommand)]
    Puzzle(PuzzleCommand),
    /// Run a TOML benchmark spec.
    Bench {
        spec: PathBuf,
        /// Where to write JSON-lines records.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the 0/1 program for one horizon in LP format.
    ExportLp(ExportArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Fixture {
    Fig1,
    Fig2,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    ForbidHeadOn,
    AllowHeadOn,
}

impl VariantArg {
    fn apply(self, instance: &mut MapfInstance) -> Result<()> {
        if matches!(instance.variant, Variant::GridDiagonal(_)) {
            bail!("the grid-diagonal variant can only be set in the instance file");
        }
        instance.variant = match self {
            VariantArg::ForbidHeadOn => Variant::ForbidHeadOn,
            VariantArg::AllowHeadOn => Variant::AllowHeadOn,
        };
        Ok(())
    }
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 20)]
    width: usize,
    #[arg(long, default_value_t = 15)]
    height: usize,
    /// Fraction of cells removed.
    #[arg(long, default_value_t = 0.2)]
    obstacles: f64,
    #[arg(long, default_value_t = 10)]
    robots: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Emit a fixed example instead of a random grid.
    #[arg(long)]
    fixture: Option<Fixture>,
    /// Line length of the fig1 fixture.
    #[arg(long, default_value_t = 4)]
    line: usize,
    #[arg(long)]
    variant: Option<VariantArg>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgoArg {
    Tompp,
    DomppFull,
    DomppFixed,
    Heuristic,
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long, value_enum, default_value = "tompp")]
    algo: AlgoArg,
    /// Seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(i64).range(0..=1))]
    stay_cost: i64,
    #[arg(long)]
    variant: Option<VariantArg>,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum PuzzleCommand {
    /// Print a random n×n state.
    Random {
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Solve a 3×3 state optimally by exhaustive search.
    Bfs(PuzzleInput),
    /// Solve an n×n state with the constructive method.
    Constructive(PuzzleInput),
    /// Count the cycles and moves of the n×n grid.
    Cycles {
        #[arg(long, default_value_t = 3)]
        n: usize,
    },
}

#[derive(Args)]
struct PuzzleInput {
    /// State as `n c1 ... cN`; a random state is used when absent.
    #[arg(long, allow_hyphen_values = true)]
    state: Option<String>,
    #[arg(long, default_value_t = 3)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the moves as a solution file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Tompp,
    Dompp,
}

#[derive(Args)]
struct ExportArgs {
    instance: PathBuf,
    #[arg(long)]
    horizon: usize,
    #[arg(long, value_enum, default_value = "tompp")]
    model: ModelArg,
    #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(i64).range(0..=1))]
    stay_cost: i64,
    #[arg(long)]
    no_prune: bool,
    #[arg(long)]
    variant: Option<VariantArg>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn read_instance(path: &Path) -> Result<MapfInstance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_instance(&text).with_context(|| format!("parsing {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => std::io::stdout().write_all(text.as_bytes()).context("writing stdout"),
    }
}

fn gen(args: GenArgs) -> Result<u8> {
    let mut instance = match args.fixture {
        Some(Fixture::Fig1) => fig1_instance(args.line)?,
        Some(Fixture::Fig2) => fig2_instance(),
        None => gen_grid_instance(args.width, args.height, args.obstacles, args.robots, args.seed)?,
    };
    if let Some(v) = args.variant {
        v.apply(&mut instance)?;
    }
    emit(args.out.as_deref(), &write_instance(&instance))?;
    Ok(SOLVED)
}

fn solve(args: SolveArgs) -> Result<u8> {
    let mut instance = read_instance(&args.instance)?;
    if let Some(v) = args.variant {
        v.apply(&mut instance)?;
    }
    let mut config = PlannerConfig { costs: CostProfile { traverse_cost: 1, stay_cost: args.stay_cost }, ..PlannerConfig::default() };
    config.solver.time_limit = match args.time_limit {
        Some(s) if !(s > 0.0 && s.is_finite()) => bail!("time limit must be positive"),
        Some(s) => Some(Duration::from_secs_f64(s)),
        None => None,
    };
    config.solver.threads = args.threads.max(1);
    config.solver.seed = args.seed;
    let algorithm = match args.algo {
        AlgoArg::Tompp => Algorithm::Tompp,
        AlgoArg::DomppFull => Algorithm::DomppFull,
        AlgoArg::DomppFixed => Algorithm::DomppFixed,
        AlgoArg::Heuristic => Algorithm::Heuristic,
    };
    let run = run_algorithm(&instance, algorithm, &config)?;
    let code = match run.outcome {
        RunOutcome::Solved => SOLVED,
        RunOutcome::Unsolvable => UNSOLVABLE,
        _ => LIMIT,
    };
    match (&run.solution, run.outcome) {
        (Some(s), RunOutcome::Solved) => {
            eprintln!("solved: makespan {} distance {}", s.makespan(), s.total_distance());
            emit(args.out.as_deref(), &write_solution(s))?;
        }
        (Some(s), _) => {
            eprintln!("limit reached; writing the partial plan (makespan {})", s.makespan());
            emit(args.out.as_deref(), &write_solution(s))?;
        }
        (None, RunOutcome::Unsolvable) => eprintln!("unsolvable"),
        (None, _) => eprintln!("limit reached without a plan"),
    }
    Ok(code)
}

fn validate(instance: &Path, solution: &Path) -> Result<u8> {
    let instance = read_instance(instance)?;
    let text = fs::read_to_string(solution).with_context(|| format!("reading {}", solution.display()))?;
    let sol = parse_solution(&text).with_context(|| format!("parsing {}", solution.display()))?;
    let report = validate_solution(&instance, &sol)?;
    for v in &report.violations {
        println!("{v:?}");
    }
    println!("makespan {} distance {} violations {}", report.makespan, report.total_distance, report.violations.len());
    Ok(if report.is_valid() { SOLVED } else { INVALID })
}

fn puzzle_state(input: &PuzzleInput) -> Result<PuzzleState> {
    match &input.state {
        Some(s) => Ok(s.parse()?),
        None => Ok(random_state(input.n, input.seed)?),
    }
}

fn print_moves(start: &PuzzleState, moves: &[mapf_core::puzzle::CycleMove], out: Option<&Path>) -> Result<()> {
    println!("{}", start.board());
    for m in moves {
        println!("{m}");
    }
    let end = apply_moves(start, moves)?;
    print!("{} moves\n{}", moves.len(), end.board());
    if let Some(p) = out {
        emit(Some(p), &write_solution(&moves_to_solution(start, moves)?))?;
    }
    Ok(())
}

fn puzzle(cmd: PuzzleCommand) -> Result<u8> {
    match cmd {
        PuzzleCommand::Random { n, seed } => println!("{}", random_state(n, seed)?),
        PuzzleCommand::Bfs(input) => {
            let start = puzzle_state(&input)?;
            print_moves(&start, &bfs_solve(&start)?, input.out.as_deref())?;
        }
        PuzzleCommand::Constructive(input) => {
            let start = puzzle_state(&input)?;
            print_moves(&start, &constructive_solve(&start)?, input.out.as_deref())?;
        }
        PuzzleCommand::Cycles { n } => {
            println!("cycles {}", enumerate_cycles(n)?.len());
            if n <= 4 {
                let c = branching_counts(n)?;
                println!("single-cycle moves {}", c.single);
                println!("moves with up to two cycles {}", c.up_to_pairs);
                println!("all moves {}", c.full);
            }
        }
    }
    Ok(SOLVED)
}

fn bench(spec: &Path, out: Option<&Path>) -> Result<u8> {
    let text = fs::read_to_string(spec).with_context(|| format!("reading {}", spec.display()))?;
    let spec: BenchSpec = text.parse()?;
    let records = mapf_core::bench::run_benchmark(&spec)?;
    print!("{}", render_table(&records));
    if let Some(p) = out {
        emit(Some(p), &records_to_jsonl(&records))?;
    }
    Ok(SOLVED)
}

fn export(args: ExportArgs) -> Result<u8> {
    let mut instance = read_instance(&args.instance)?;
    if let Some(v) = args.variant {
        v.apply(&mut instance)?;
    }
    let net = expand(&instance, args.horizon, CostProfile { traverse_cost: 1, stay_cost: args.stay_cost })?;
    let model = match args.model {
        ModelArg::Tompp => build_tompp_model(&net, !args.no_prune),
        ModelArg::Dompp => build_dompp_model(&net, !args.no_prune),
    };
    let mut buf = Vec::new();
    export_lp(&model, &mut buf)?;
    emit(args.out.as_deref(), &String::from_utf8(buf).expect("LP text is UTF-8"))?;
    Ok(SOLVED)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => gen(a),
        Command::Solve(a) => solve(a),
        Command::Validate { instance, solution } => validate(&instance, &solution),
        Command::Puzzle(c) => puzzle(c),
        Command::Bench { spec, out } => bench(&spec, out.as_deref()),
        Command::ExportLp(a) => export(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(INPUT_ERROR)
        }
    }
}
