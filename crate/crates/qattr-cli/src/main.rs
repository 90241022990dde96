//! `qattr`: train parameterized quantum classifiers in simulation and
//! compute integrated-gradients input attributions with exact or
//! Hadamard-test gradient backends.

mod commands;
mod config;
mod data;
mod error;
mod output;
mod render;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::error::CliError;

#[derive(Parser)]
#[command(
    name = "qattr",
    about = "Statevector simulation and input attribution for quantum classifiers",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
    /// Override the config's seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate or ingest a dataset and write the internal samples file.
    GenerateData {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Train a classifier and write the model, history and summary.
    Train {
        #[command(flatten)]
        common: CommonArgs,
        /// Override the config's iteration count.
        #[arg(long)]
        iters: Option<usize>,
    },
    /// Evaluate a trained model's accuracy on a task.
    Evaluate {
        #[command(flatten)]
        common: CommonArgs,
        /// Trained model JSON.
        #[arg(long)]
        model: PathBuf,
    },
    /// Compute an integrated-gradients attribution map and heatmap.
    Attribute {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        model: PathBuf,
        /// Override path steps.
        #[arg(long)]
        steps: Option<usize>,
        /// Override gradient method (exact, hadamard-single,
        /// hadamard-multi:<m>, param-shift).
        #[arg(long)]
        method: Option<qattr_core::gradient::GradientMethod>,
        /// Override shot budget (a count or "exact").
        #[arg(long)]
        shots: Option<qattr_core::gradient::Shots>,
        /// Override the sample index.
        #[arg(long)]
        index: Option<usize>,
        /// Override the sample split ("train" or "test").
        #[arg(long)]
        split: Option<String>,
    },
    /// Compare estimated gradient components against the exact backend.
    Gradcheck {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        model: PathBuf,
    },
    /// Attribute with untrained null models and report concentration.
    NullModel {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Download the MNIST (or FashionMNIST) IDX archives.
    FetchMnist {
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Fetch FashionMNIST instead of MNIST.
        #[arg(long)]
        fashion: bool,
        /// Alternative mirror base URL.
        #[arg(long)]
        base_url: Option<String>,
    },
}

fn parse_split(raw: &str) -> Result<config::SplitChoice, CliError> {
    match raw {
        "train" => Ok(config::SplitChoice::Train),
        "test" => Ok(config::SplitChoice::Test),
        other => Err(CliError::config(format!(
            "bad split {other:?} (expected train or test)"
        ))),
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::GenerateData { common } => {
            commands::generate_data::run(&common.config, &common.out)
        }
        Command::Train { common, iters } => commands::train::run(
            &common.config,
            &common.out,
            &commands::train::Overrides {
                seed: common.seed,
                iters,
            },
        ),
        Command::Evaluate { common, model } => {
            commands::evaluate::run(&common.config, &model, &common.out)
        }
        Command::Attribute {
            common,
            model,
            steps,
            method,
            shots,
            index,
            split,
        } => {
            let split = split.as_deref().map(parse_split).transpose()?;
            commands::attribute::run(
                &common.config,
                &model,
                &common.out,
                &commands::attribute::Overrides {
                    seed: common.seed,
                    steps,
                    method,
                    shots,
                    index,
                    split,
                },
            )
        }
        Command::Gradcheck { common, model } => {
            commands::gradcheck::run(&common.config, &model, &common.out, common.seed)
        }
        Command::NullModel { common } => {
            commands::null_model::run(&common.config, &common.out, common.seed)
        }
        Command::FetchMnist {
            out,
            fashion,
            base_url,
        } => commands::fetch::run(&out, fashion, base_url.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("{}", error.to_stderr_json());
            ExitCode::from(error.exit_code() as u8)
        }
    }
}
