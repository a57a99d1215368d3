//! Subcommand drivers shared by the `phi-bvp` binary and the tests.
//!
//! Exit codes: 0 success, 1 I/O or configuration error, 2 validation or
//! precondition failure, 3 non-convergence or failed shooting. Best-effort
//! artifacts are still written for code 3.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;

use crate::config::{load_config, ProblemConfig};
use crate::error::{Error, Result};
use crate::general::{self, SweepPoint};
use crate::mesh::Mesh;
use crate::output::{write_json, write_profile_csv, write_solution_csv, RunReport, Status};
use crate::path::DiscretePath;
use crate::problem::{validate_problem, BoundarySpec, BvpProblem};
use crate::truncation::{build_truncated, compute_apriori_bounds, verify_lower_upper, LowerUpperPair, Side};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Verify,
    Bounds,
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Verify => "verify",
            Command::Bounds => "bounds",
            Command::Sweep => "sweep",
        }
    }
}

/// Where to write artifacts. `out` receives the solution CSV (`solve`) or
/// the profile CSV (`sweep`); the JSON report goes to `report`, or to stdout
/// when absent.
#[derive(Debug, Clone, Default)]
pub struct OutPaths {
    pub out: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) | Error::Config(_) | Error::Expr(_) => 1,
        Error::NonConvergence { .. } | Error::NoSignChange { .. } | Error::ShootingStalled { .. } => 3,
        Error::InnerSolve { .. } => 3,
        _ => 2,
    }
}

fn status_of(e: &Error) -> Status {
    match e {
        Error::NoSignChange { .. } => Status::NoSignChange,
        Error::InnerSolve { source, .. } => status_of(source),
        e => match exit_code(e) {
            3 => Status::NonConvergence,
            2 => Status::ValidationFailed,
            _ => Status::Failed,
        },
    }
}

/// Loads `path`, runs `command` and writes the artifacts. Diagnostics go to
/// stderr; the return value is the process exit code.
pub fn run_config(path: &Path, command: Command, out: &OutPaths) -> i32 {
    let cfg = match load_config(path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{}: {e}", path.display());
            return exit_code(&e);
        }
    };
    match execute(&cfg, command, out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}: {e}", path.display());
            exit_code(&e)
        }
    }
}

/// Runs `command` on every config in parallel, writing `<stem>.csv` and
/// `<stem>.json` into `out_dir`. Returns the largest exit code.
pub fn run_batch(configs: &[PathBuf], command: Command, out_dir: &Path) -> i32 {
    if let Err(e) = std::fs::create_dir_all(out_dir) {
        eprintln!("{}: {e}", out_dir.display());
        return 1;
    }
    configs
        .par_iter()
        .map(|cfg| {
            let stem = cfg.file_stem().map_or_else(|| "run".into(), |s| s.to_string_lossy().into_owned());
            let out = OutPaths {
                out: Some(out_dir.join(format!("{stem}.csv"))),
                report: Some(out_dir.join(format!("{stem}.json"))),
            };
            run_config(cfg, command, &out)
        })
        .max()
        .unwrap_or(0)
}

/// Runs `command` on a parsed config. `Err` is reserved for failures that
/// prevent writing a report at all.
pub fn execute(cfg: &ProblemConfig, command: Command, out: &OutPaths) -> Result<i32> {
    let prob = &cfg.problem;
    let mesh = prob.mesh(cfg.mesh.n, cfg.mesh.grading)?;
    let mut report = RunReport::new(command.name(), prob, mesh.n_cells());

    let code = match command {
        Command::Verify => verify(cfg, &mesh, &mut report),
        Command::Bounds => bounds(cfg, &mesh, &mut report),
        Command::Solve | Command::Sweep => {
            let validation = validate_problem(prob, &mesh, cfg.audit_samples);
            let ok = validation.passed();
            report.validation = Some(validation);
            if ok {
                solve(cfg, command, &mesh, out, &mut report)
            } else {
                report.status = Status::ValidationFailed;
                report.error = Some("problem validation failed".into());
                Ok(2)
            }
        }
    };
    let code = code.unwrap_or_else(|e| {
        report.status = status_of(&e);
        report.error = Some(e.to_string());
        if let Error::NoSignChange { profile, .. } = &e {
            report.profile = profile.iter().map(|&(nu, score)| SweepPoint { nu, score }).collect();
        }
        exit_code(&e)
    });
    if let Some(msg) = &report.error {
        eprintln!("{}: {msg}", command.name());
    }

    match &out.report {
        Some(p) => write_json(BufWriter::new(File::create(p)?), &report)?,
        None => write_json(std::io::stdout().lock(), &report)?,
    }
    if command == Command::Sweep {
        if let Some(p) = &out.out {
            write_profile_csv(BufWriter::new(File::create(p)?), &report.profile)?;
        }
    }
    Ok(code)
}

fn pair_of(prob: &BvpProblem, mesh: &Arc<Mesh>) -> Result<Option<LowerUpperPair>> {
    match (&prob.lower, &prob.upper) {
        (Some(_), Some(_)) => Ok(Some(LowerUpperPair::from_problem(prob, mesh)?)),
        _ => Ok(None),
    }
}

fn solve(cfg: &ProblemConfig, command: Command, mesh: &Arc<Mesh>, out: &OutPaths, report: &mut RunReport) -> Result<i32> {
    let prob = &cfg.problem;
    if command == Command::Sweep && matches!(prob.boundary, BoundarySpec::Dirichlet { .. }) {
        return Err(Error::WrongBoundaryKind { expected: "non-Dirichlet" });
    }
    let pair = pair_of(prob, mesh)?;
    let truncated;
    let target = if cfg.truncate {
        let pair = pair.as_ref().ok_or(Error::Missing("lower/upper pair (required for truncation)"))?;
        let b = compute_apriori_bounds(prob, pair, mesh)?;
        truncated = build_truncated(prob, pair, &b)?;
        report.bounds = Some(b);
        &truncated
    } else {
        prob
    };

    match general::solve(target, mesh, pair.as_ref(), &cfg.shoot) {
        Ok(res) => {
            if res.report.apriori.is_some() {
                report.bounds = res.report.apriori.clone();
            }
            report.profile = res.profile;
            report.solve = Some(res.report);
            if command == Command::Solve {
                write_solution(out, &res.path, target)?;
            }
            Ok(0)
        }
        Err(Error::NonConvergence { iterations, distance, best }) => {
            let (path, rep) = *best;
            if command == Command::Solve {
                write_solution(out, &path, target)?;
            }
            report.solve = Some(rep);
            report.status = Status::NonConvergence;
            report.error = Some(format!(
                "fixed-point iteration did not converge after {iterations} iterations (distance {distance:e})"
            ));
            Ok(3)
        }
        Err(e) => Err(e),
    }
}

fn write_solution(out: &OutPaths, path: &DiscretePath, prob: &BvpProblem) -> Result<()> {
    if let Some(p) = &out.out {
        let mut w = BufWriter::new(File::create(p)?);
        write_solution_csv(&mut w, path, prob)?;
        w.flush()?;
    }
    Ok(())
}

fn verify(cfg: &ProblemConfig, mesh: &Arc<Mesh>, report: &mut RunReport) -> Result<i32> {
    let pair = pair_of(&cfg.problem, mesh)?.ok_or(Error::Missing("lower/upper pair"))?;
    let tol = cfg.shoot.bc_tol;
    report.sides = vec![
        verify_lower_upper(&pair.alpha, &cfg.problem, Side::Lower, tol)?,
        verify_lower_upper(&pair.beta, &cfg.problem, Side::Upper, tol)?,
    ];
    if report.sides.iter().all(|s| s.passed) {
        Ok(0)
    } else {
        report.status = Status::ValidationFailed;
        report.error = Some("lower/upper inequality violated".into());
        Ok(2)
    }
}

fn bounds(cfg: &ProblemConfig, mesh: &Arc<Mesh>, report: &mut RunReport) -> Result<i32> {
    let pair = pair_of(&cfg.problem, mesh)?.ok_or(Error::Missing("lower/upper pair"))?;
    report.bounds = Some(compute_apriori_bounds(&cfg.problem, &pair, mesh)?);
    Ok(0)
}
