use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use phi_bvp::cli::{run_batch, run_config, Command, OutPaths};

#[derive(Parser)]
#[command(name = "phi-bvp", version, about = "Solver for singular Phi-Laplacian boundary value problems")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct Io {
    /// Problem file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Solution CSV (solve) or profile CSV (sweep).
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON report; printed to stdout when omitted.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve the configured problem.
    Solve(Io),
    /// Check the lower/upper inequalities of the configured pair.
    Verify(Io),
    /// Print the a-priori bounds (M, a0, N, L_M).
    Bounds(Io),
    /// Write the shooting profile s(nu).
    Sweep(Io),
    /// Run one command on several configs in parallel.
    Batch {
        #[arg(long, value_enum, default_value = "solve")]
        command: BatchCommand,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(required = true)]
        configs: Vec<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum BatchCommand {
    Solve,
    Verify,
    Bounds,
    Sweep,
}

impl From<BatchCommand> for Command {
    fn from(c: BatchCommand) -> Self {
        match c {
            BatchCommand::Solve => Command::Solve,
            BatchCommand::Verify => Command::Verify,
            BatchCommand::Bounds => Command::Bounds,
            BatchCommand::Sweep => Command::Sweep,
        }
    }
}

fn single(command: Command, io: Io) -> i32 {
    run_config(&io.config, command, &OutPaths { out: io.out, report: io.report })
}

fn main() -> ExitCode {
    let code = match Cli::parse().command {
        Cmd::Solve(io) => single(Command::Solve, io),
        Cmd::Verify(io) => single(Command::Verify, io),
        Cmd::Bounds(io) => single(Command::Bounds, io),
        Cmd::Sweep(io) => single(Command::Sweep, io),
        Cmd::Batch { command, out_dir, configs } => run_batch(&configs, command.into(), &out_dir),
    };
    ExitCode::from(code as u8)
}
