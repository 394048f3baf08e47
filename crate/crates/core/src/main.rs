use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use cotton_flow::cli::{self, Command, Options};

#[derive(Parser)]
#[command(name = "cotton-flow", version, about = "Cotton flow laboratory")]
struct Args {
    #[command(subcommand)]
    command: Cmd,
    /// Experiment configuration (key = value with [section] headers)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file for the trajectory, table or report
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for the random generator; overrides [run] seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (0 or unset: all cores)
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Structural checks of the Cotton tensor on random periodic charts
    Verify,
    /// Integrate one flow trajectory and write it as CSV
    Flow,
    /// Scan the Horava gauge parameter alpha
    Horava,
    /// Scan the stationarity residual over a lattice of metrics
    Fixedpoints,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { cli::EXIT_CONFIG_ERROR } else { cli::EXIT_SUCCESS };
            return ExitCode::from(code as u8);
        }
    };
    let command = match args.command {
        Cmd::Verify => Command::Verify,
        Cmd::Flow => Command::Flow,
        Cmd::Horava => Command::Horava,
        Cmd::Fixedpoints => Command::FixedPoints,
    };
    let opts = Options { config: args.config, out: args.out, seed: args.seed, jobs: args.jobs };
    match cli::run(command, &opts) {
        Ok(out) => {
            print!("{}", out.report);
            ExitCode::from(out.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
