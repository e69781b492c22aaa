use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qae_cli::commands::{self, PreprocessArgs};
use qae_cli::{CliResult, RunConfig};

/// Quantum and classical autoencoder anomaly detection.
///
/// Exit codes: 2 config error, 3 data error, 4 runtime failure.
#[derive(Parser)]
#[command(name = "qae", version)]
struct Cli {
    /// Run configuration (TOML). Defaults apply when omitted.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. `--set qae.shots=8192`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Turn a raw event-log CSV into the cached 24-column feature matrix.
    Preprocess {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Reuse encoders fitted on the training split.
        #[arg(long)]
        state_in: Option<PathBuf>,
        /// Where to write freshly fitted encoders [default: <output>.state.json].
        #[arg(long)]
        state_out: Option<PathBuf>,
    },
    /// Write a seeded synthetic train/test pair.
    Synth {
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Select, scale, train and calibrate the configured model.
    Train,
    /// Score a labelled test file and write metrics and histograms.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        test: Option<PathBuf>,
        /// [default: the model's directory]
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Side-by-side metrics of several models on one test file.
    Compare {
        #[arg(long = "model", required = true)]
        models: Vec<PathBuf>,
        #[arg(long)]
        test: Option<PathBuf>,
        /// [default: <output_dir>/compare.csv]
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Column statistics and the columns each selection strategy picks.
    SelectReport {
        #[arg(long)]
        input: Option<PathBuf>,
        /// [default: <output_dir>/select-report.json]
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> CliResult<String> {
    let cfg = RunConfig::load(cli.config.as_deref(), &cli.overrides)?;
    match cli.command {
        Command::Preprocess {
            input,
            output,
            state_in,
            state_out,
        } => commands::preprocess(
            &cfg,
            &PreprocessArgs {
                input,
                output,
                state_in,
                state_out,
            },
        ),
        Command::Synth { out_dir } => commands::synth(&cfg, &out_dir),
        Command::Train => commands::train(&cfg),
        Command::Eval {
            model,
            test,
            out_dir,
        } => commands::eval(&cfg, &model, test.as_deref(), out_dir.as_deref()),
        Command::Compare { models, test, out } => {
            commands::compare(&cfg, &models, test.as_deref(), out.as_deref())
        }
        Command::SelectReport { input, out } => {
            commands::select_report(&cfg, input.as_deref(), out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("qae: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
