use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand as ClapSubcommand};
use tamarc_cli::{report, run, RunOptions, Subcommand};

/// Rate regions, converse bounds and coding simulations for the
/// time-asynchronous Gaussian multiple-access relay channel.
#[derive(Parser)]
#[command(name = "tamarc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(ClapSubcommand)]
enum Command {
    /// Outer and achievable regions, gain conditions and a feasibility verdict.
    Region(Common),
    /// Sliced vs cyclic mutual-information certificate and closed-form bounds.
    Bounds(Common),
    /// Monte Carlo error rates of the separate source-channel scheme.
    Simulate(Common),
    /// Two-user interference channel region.
    Ic(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, c) = match cli.command {
        Command::Region(c) => (Subcommand::Region, c),
        Command::Bounds(c) => (Subcommand::Bounds, c),
        Command::Simulate(c) => (Subcommand::Simulate, c),
        Command::Ic(c) => (Subcommand::Ic, c),
    };
    let opts = RunOptions {
        config: c.config,
        seed: c.seed,
        out: c.out,
        threads: c.threads,
    };
    match run(cmd, &opts) {
        Ok(m) => {
            let _ = report(&m, std::io::stderr());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
