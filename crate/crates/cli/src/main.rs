//! `convmix`: simulate conversational mixtures, extract turn-taking
//! statistics from annotations, and compare dataset realism.

mod commands;
mod errors;

use clap::{Parser, Subcommand};

use errors::CliError;

#[derive(Parser)]
#[command(name = "convmix", version, about = "Conversational mixture simulation toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a dataset of conversational mixtures.
    Simulate(commands::simulate::SimulateArgs),
    /// Estimate simulation parameters from RTTM annotations.
    ExtractStats(commands::extract::ExtractArgs),
    /// Compare silence/overlap statistics of two RTTM datasets.
    Compare(commands::compare::CompareArgs),
    /// Generate a deterministic synthetic utterance pool.
    SynthPool(commands::synth_pool::SynthPoolArgs),
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            eprint!("{e}");
            std::process::exit(CliError::USAGE);
        }
        Err(e) => {
            // --help / --version
            print!("{e}");
            std::process::exit(0);
        }
    };
    let result = match cli.command {
        Command::Simulate(args) => commands::simulate::run(args),
        Command::ExtractStats(args) => commands::extract::run(args),
        Command::Compare(args) => commands::compare::run(args),
        Command::SynthPool(args) => commands::synth_pool::run(args),
    };
    match result {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.code());
        }
    }
}
