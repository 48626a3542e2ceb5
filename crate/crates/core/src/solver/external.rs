//! Bridge to an external solver run as a child process.
//!
//! The command template is split on whitespace and run without a shell.
//! Placeholders `{lp}`, `{sol}`, `{seed}` and `{time_limit}` (seconds) are
//! substituted in each argument. The solver must exit with status 0 and
//! write a solution file of `<variable> <value>` lines, optionally preceded
//! by `status optimal|infeasible|limit`. Variables it omits are read as 0.
//! Any returned assignment is checked against the model before use.

use std::collections::HashMap;
use std::fs;
use std::path::PathBuf;
use std::process::Command;

use super::{check_model, Assignment, LimitReason, SolveOutcome, SolverConfig, SolverError};
use crate::ilp::{export_lp, IlpModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolutionStatus {
    Optimal,
    Infeasible,
    Limit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolutionFile {
    pub status: Option<SolutionStatus>,
    pub values: Vec<(String, f64)>,
}

/// Converts solver-specific output into the `var value` dialect.
pub type Adapter = fn(&str) -> Result<SolutionFile, String>;

#[derive(Debug, Clone)]
pub struct ExternalSolver {
    pub command_template: String,
    pub workdir: PathBuf,
    pub adapter: Option<Adapter>,
}

impl ExternalSolver {
    pub fn new(command_template: impl Into<String>, workdir: impl Into<PathBuf>) -> Self {
        ExternalSolver { command_template: command_template.into(), workdir: workdir.into(), adapter: None }
    }
}

pub fn parse_solution_file(text: &str) -> Result<SolutionFile, String> {
    let mut status = None;
    let mut values = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(format!("line {}: expected two fields", no + 1));
        }
        if fields[0] == "status" {
            status = Some(match fields[1] {
                "optimal" => SolutionStatus::Optimal,
                "infeasible" => SolutionStatus::Infeasible,
                "limit" => SolutionStatus::Limit,
                other => return Err(format!("line {}: unknown status {}", no + 1, other)),
            });
            continue;
        }
        let value: f64 = fields[1].parse().map_err(|_| format!("line {}: bad value {}", no + 1, fields[1]))?;
        values.push((fields[0].to_string(), value));
    }
    Ok(SolutionFile { status, values })
}

fn bridge(msg: impl Into<String>) -> SolverError {
    SolverError::Bridge(msg.into())
}

pub fn solve_external(model: &IlpModel, solver: &ExternalSolver, config: &SolverConfig) -> Result<SolveOutcome, SolverError> {
    check_model(model)?;
    fs::create_dir_all(&solver.workdir).map_err(|e| bridge(format!("workdir: {}", e)))?;
    let lp_path = solver.workdir.join("model.lp");
    let sol_path = solver.workdir.join("model.sol");
    let mut lp = Vec::new();
    export_lp(model, &mut lp).map_err(|e| bridge(e.to_string()))?;
    fs::write(&lp_path, lp).map_err(|e| bridge(format!("writing LP file: {}", e)))?;
    if sol_path.exists() {
        fs::remove_file(&sol_path).map_err(|e| bridge(format!("clearing old solution: {}", e)))?;
    }

    let time_limit = config.time_limit.map_or("0".to_string(), |d| format!("{}", d.as_secs_f64()));
    let args: Vec<String> = solver
        .command_template
        .split_whitespace()
        .map(|a| {
            a.replace("{lp}", &lp_path.to_string_lossy())
                .replace("{sol}", &sol_path.to_string_lossy())
                .replace("{seed}", &config.seed.to_string())
                .replace("{time_limit}", &time_limit)
        })
        .collect();
    let (program, rest) = args.split_first().ok_or_else(|| bridge("empty command template"))?;
    let output = Command::new(program)
        .args(rest)
        .current_dir(&solver.workdir)
        .output()
        .map_err(|e| bridge(format!("launching {}: {}", program, e)))?;
    if !output.status.success() {
        return Err(bridge(format!("{} exited with {}: {}", program, output.status, String::from_utf8_lossy(&output.stderr).trim())));
    }
    let text = fs::read_to_string(&sol_path).map_err(|e| bridge(format!("reading solution file: {}", e)))?;
    let parsed = match solver.adapter {
        Some(adapt) => adapt(&text),
        None => parse_solution_file(&text),
    }
    .map_err(bridge)?;

    if parsed.status == Some(SolutionStatus::Infeasible) {
        return Ok(SolveOutcome::Infeasible);
    }
    let index: HashMap<&str, usize> = model.variables.iter().enumerate().map(|(i, v)| (v.name.as_str(), i)).collect();
    let mut values: Vec<bool> = model.variables.iter().map(|v| v.fixed.unwrap_or(false)).collect();
    for (name, x) in &parsed.values {
        let &v = index.get(name.as_str()).ok_or_else(|| bridge(format!("unknown variable {}", name)))?;
        values[v] = if x.abs() <= 1e-6 {
            false
        } else if (x - 1.0).abs() <= 1e-6 {
            true
        } else {
            return Err(bridge(format!("non-binary value {} for {}", x, name)));
        };
    }
    if parsed.values.is_empty() && parsed.status == Some(SolutionStatus::Limit) {
        return Ok(SolveOutcome::Limit(None, LimitReason::Time));
    }
    let objective = model.check(&values).map_err(|v| bridge(format!("returned assignment rejected: {}", v)))?;
    let assignment = Assignment { values, objective };
    Ok(match parsed.status {
        Some(SolutionStatus::Limit) => SolveOutcome::Limit(Some(assignment), LimitReason::Time),
        _ => SolveOutcome::Optimal(assignment),
    })
}
