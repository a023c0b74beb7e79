use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use reprmetric_cli::{cmd_predict, cmd_train_preference, cmd_train_triplet, cmd_verify, CliError};

#[derive(Parser)]
#[command(
    name = "reprmetric",
    version,
    about = "Kernelized metric and preference learning"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Learn a metric and an ideal point from paired comparisons.
    TrainPreference {
        #[arg(long)]
        config: PathBuf,
    },
    /// Learn a metric from triplet comparisons.
    TrainTriplet {
        #[arg(long)]
        config: PathBuf,
    },
    /// Print `query,delta,label` for each query as CSV.
    Predict {
        #[arg(long)]
        model: PathBuf,
        /// Items referenced by id in the queries (default: the training items).
        #[arg(long)]
        items: Option<PathBuf>,
        #[arg(long)]
        queries: PathBuf,
    },
    /// Run the randomized subspace-reduction checks and write a JSON report.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(command: Command) -> Result<(), CliError> {
    let stdout = &mut std::io::stdout().lock();
    match command {
        Command::TrainPreference { config } => cmd_train_preference(&config, stdout).map(drop),
        Command::TrainTriplet { config } => cmd_train_triplet(&config, stdout).map(drop),
        Command::Predict {
            model,
            items,
            queries,
        } => cmd_predict(&model, items.as_deref(), &queries, stdout),
        Command::Verify { seed, out } => cmd_verify(seed, &out, stdout),
    }
}

fn main() -> ExitCode {
    // clap's own usage errors exit with 2, which is reserved for linearly
    // dependent items here; report them as configuration errors instead.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
