//! Batch benchmark harness: generate and import instances, run the exact,
//! greedy-recursive, and reinforcement-learning solvers, mine hard
//! instances, and emit reproducible experiment reports.
//!
//! Every invocation writes its outputs plus a `manifest.json` into the
//! output directory; rerunning a subcommand with the same arguments and
//! `--jobs 1` reproduces all CSV outputs byte for byte.

mod commands;
mod manifest;
mod out;

use clap::{Parser, Subcommand};
use rqaoa_core::Error as CoreError;

#[derive(Parser)]
#[command(name = "isingbench", version, about = "Ising solver benchmark suite")]
struct Cli {
    /// Worker threads (0 = all cores). Use 1 for bit-reproducible runs.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,

    /// Output directory (falls back to $ISINGBENCH_OUT, then ./isingbench-out).
    #[arg(long, global = true)]
    out: Option<std::path::PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate random regular weighted instances.
    Generate(commands::generate::Args),
    /// Solve an instance exactly by enumeration.
    Exact(commands::exact::Args),
    /// Run the greedy recursive solver.
    Rqaoa(commands::rqaoa::Args),
    /// Train the quantum-informed stochastic policy.
    RlRqaoa(commands::rl::RqaoaArgs),
    /// Train the classical baseline policy.
    RlRone(commands::rl::RoneArgs),
    /// Scan an ensemble for instances the recursive solver fails on.
    Mine(commands::mine::Args),
    /// Tie statistics and approximation ratios on the 30-vertex cubic cage.
    BenchFig3(commands::fig3::Args),
    /// Trained policy vs best-of-N greedy recursion on hard instances.
    BenchFig5(commands::fig5::Args),
    /// Quantum-informed vs classical policy learning curves.
    BenchFig6(commands::fig6::Args),
    /// Dump the depth-1 energy landscape over the angle grid.
    Landscape(commands::landscape::Args),
}

fn main() {
    env_logger::init();
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        eprintln!("error: {err:#}");
        std::process::exit(exit_code(&err));
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build_global()
        .ok();
    let out_dir = out::resolve_out_dir(cli.out)?;
    match cli.command {
        Command::Generate(args) => commands::generate::run(args, &out_dir),
        Command::Exact(args) => commands::exact::run(args),
        Command::Rqaoa(args) => commands::rqaoa::run(args, &out_dir),
        Command::RlRqaoa(args) => commands::rl::run_rqaoa(args, &out_dir),
        Command::RlRone(args) => commands::rl::run_rone(args, &out_dir),
        Command::Mine(args) => commands::mine::run(args, &out_dir),
        Command::BenchFig3(args) => commands::fig3::run(args, &out_dir),
        Command::BenchFig5(args) => commands::fig5::run(args, &out_dir),
        Command::BenchFig6(args) => commands::fig6::run(args, &out_dir),
        Command::Landscape(args) => commands::landscape::run(args, &out_dir),
    }
}

/// Distinct exit codes per error family (2 is claimed by argument parsing).
fn exit_code(err: &anyhow::Error) -> i32 {
    match err.downcast_ref::<CoreError>() {
        Some(CoreError::Serde(_)) | Some(CoreError::InvalidInstance(_)) => 3,
        Some(CoreError::InfeasibleParameters(_)) => 4,
        Some(CoreError::SizeLimit { .. }) => 5,
        Some(CoreError::InvalidConfig(_))
        | Some(CoreError::InvalidBudget(_))
        | Some(CoreError::InvalidBatch(_))
        | Some(CoreError::NotAvailable(_)) => 6,
        Some(CoreError::Io(_)) => 7,
        Some(_) => 1,
        None => {
            if err.downcast_ref::<std::io::Error>().is_some() {
                7
            } else {
                1
            }
        }
    }
}
