use std::path::PathBuf;

use clap::{Parser, Subcommand};
use reconlab::cli::{run, Command, Overrides};

#[derive(Parser)]
#[command(name = "reconlab", version, about = "Linear reconstruction attacks on noisy releases")]
struct Args {
    #[command(subcommand)]
    command: Cmd,
    /// key=value config file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides master_seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output CSV path (stdout if absent)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: available parallelism)
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run attack trials and print one row per trial plus a summary
    Attack,
    /// Spectral and Euclidean-section probes of a matrix family
    Spectral,
    /// Grid of attack experiments, resumable from the output file
    Sweep,
    /// Exact-oracle invariant checks
    Selftest,
}

fn main() {
    env_logger::init();
    let args = Args::parse();
    let cmd = match args.command {
        Cmd::Attack => Command::Attack,
        Cmd::Spectral => Command::Spectral,
        Cmd::Sweep => Command::Sweep,
        Cmd::Selftest => Command::Selftest,
    };
    let ov = Overrides { seed: args.seed, out: args.out, workers: args.workers };
    let code = run(cmd, args.config.as_deref(), &ov, &mut std::io::stdout());
    std::process::exit(code);
}
