use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use uqfraud::uq::Method;
use uqfraud::{Execution, Result};
use uqfraud_cli::commands::{ModelKind, Pipeline};
use uqfraud_cli::config::{Overrides, Profile, RunConfig};
use uqfraud_cli::exit_code;

#[derive(Parser)]
#[command(
    name = "uqfraud",
    version,
    about = "Uncertainty-aware fraud classification pipeline"
)]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Run directory.
    #[arg(long = "out", global = true)]
    out_dir: Option<PathBuf>,
    /// mcd | ensemble | emcd
    #[arg(long, global = true)]
    method: Option<Method>,
    /// Monte Carlo passes for mcd and emcd.
    #[arg(long, global = true)]
    mc_passes: Option<usize>,
    /// paper | desk
    #[arg(long, global = true)]
    profile: Option<Profile>,
    /// Run on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    /// Suppress progress output.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Split the dataset and fit preprocessing on the training rows.
    Preprocess,
    /// Train the model the selected method needs.
    Train,
    /// Score a feature table with the selected method.
    Predict {
        /// Model file or ensemble directory (default: the run's trained model).
        #[arg(long)]
        model: Option<PathBuf>,
        /// Feature table (default: the run's test table).
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Calibration, confusion and entropy reports for a prediction dump.
    Evaluate {
        /// Prediction dump (default: the run's dump for the selected method).
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// UQ metrics over the threshold grid for a prediction dump.
    Sweep {
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Write the configured synthetic dataset as CSV plus schema.
    Synth,
    /// Run every stage for all three methods and summarize.
    Reproduce,
}

fn run(cli: Cli) -> Result<()> {
    let overrides = Overrides {
        seed: cli.seed,
        out_dir: cli.out_dir,
        method: cli.method,
        mc_passes: cli.mc_passes,
        profile: cli.profile,
    };
    let mut cfg = RunConfig::load(cli.config.as_deref(), &overrides)?;
    cfg.quiet = cli.quiet;
    let method = cfg.method;
    let mut p = Pipeline::new(cfg);
    if cli.sequential {
        p.exec = Execution::Sequential;
    }
    match cli.command {
        Command::Preprocess => p.preprocess().map(drop),
        Command::Train => p.train(ModelKind::for_method(method)).map(drop),
        Command::Predict { model, data } => p
            .predict(method, model.as_deref(), data.as_deref())
            .map(drop),
        Command::Evaluate { dump } => p
            .evaluate(&dump.unwrap_or_else(|| p.dump_path(method)))
            .map(drop),
        Command::Sweep { dump } => p
            .sweep(&dump.unwrap_or_else(|| p.dump_path(method)))
            .map(drop),
        Command::Synth => p.synth().map(drop),
        Command::Reproduce => p.reproduce().map(drop),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
