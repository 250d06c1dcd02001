use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fracuq::cli::{reference_document, run_text, Kind, RunOptions};

#[derive(Parser)]
#[command(name = "fracuq", version, about = "Forward UQ for stochastic fractional PDEs")]
struct Args {
    #[command(subcommand)]
    command: Command,
    /// Experiment configuration (TOML); an absent file means all defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides FRACUQ_OUT_DIR and the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Root seed for Monte Carlo sampling (overrides sampling.seed)
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Cross-check the fast solver against the dense direct solve.
    #[arg(long, global = true)]
    check_direct: bool,
    /// Worker threads for sample evaluation (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Solve one deterministic problem.
    Solve,
    /// Monte Carlo statistics.
    Mcs,
    /// Probabilistic collocation statistics.
    Pcm,
    /// Write a sampling grid.
    Grid,
    /// Error-vs-resolution sweep.
    Convergence,
    /// Print every configuration key with its default.
    Defaults,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let kind = match args.command {
        Command::Solve => Kind::Solve,
        Command::Mcs => Kind::Mcs,
        Command::Pcm => Kind::Pcm,
        Command::Grid => Kind::Grid,
        Command::Convergence => Kind::Convergence,
        Command::Defaults => {
            print!("{}", reference_document());
            return ExitCode::SUCCESS;
        }
    };
    let text = match &args.config {
        Some(p) => match std::fs::read_to_string(p) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("error: {}: {e}", p.display());
                return ExitCode::FAILURE;
            }
        },
        None => String::new(),
    };
    let opts = RunOptions {
        out: args.out,
        seed: args.seed,
        check_direct: args.check_direct,
        threads: args.threads,
    };
    match run_text(kind, &text, &opts) {
        Ok(summary) => {
            println!("output = {}", summary.out_dir.display());
            for (k, v) in &summary.records {
                println!("{k} = {v}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
