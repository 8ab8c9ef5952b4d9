//! `dstmd`: generate stimuli, run the small target motion detectors and
//! reproduce the tuning, ROC and direction experiments as CSV files.

mod commands;
mod config;
mod error;
mod io;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dstmd::eval::TuningParameter;
use dstmd::model::ModelKind;

#[derive(Debug, Parser)]
#[command(name = "dstmd", version, about = "Small target motion detection experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Options shared by every model-running subcommand.
#[derive(Debug, clap::Args)]
struct ModelArgs {
    /// Model and evaluation parameters (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "dstmd")]
    model: ModelChoice,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum ModelChoice {
    Dstmd,
    Estmd,
}

impl From<ModelChoice> for ModelKind {
    fn from(m: ModelChoice) -> ModelKind {
        match m {
            ModelChoice::Dstmd => ModelKind::Dstmd,
            ModelChoice::Estmd => ModelKind::Estmd,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Render a stimulus description to PGM frames and a truth table.
    Gen {
        /// Stimulus description (TOML).
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Replaces the seed of a procedural clutter background.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run a model over a directory of frames and write its detections.
    Run {
        /// Directory of 8-bit grayscale frames, read in name order.
        frames: PathBuf,
        #[command(flatten)]
        model: ModelArgs,
        /// Detection threshold; overrides `eval.gamma`.
        #[arg(long)]
        gamma: Option<f64>,
    },
    /// Sweep one target parameter and write the normalized tuning curve.
    Tune {
        #[arg(value_parser = parse_parameter)]
        parameter: TuningParameter,
        #[command(flatten)]
        model: ModelArgs,
        /// Comma-separated values; defaults to the standard sweep.
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<f64>>,
    },
    /// Detection rate against false alarms over a threshold sweep.
    Roc {
        /// Stimulus description; defaults to a target over panning clutter.
        #[arg(long)]
        stimulus: Option<PathBuf>,
        #[command(flatten)]
        model: ModelArgs,
        /// Seed of a procedural clutter background.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Per-frame direction estimates against the true motion direction.
    Direction {
        /// Stimulus description; defaults to the sinusoidal path on white.
        #[arg(long)]
        stimulus: Option<PathBuf>,
        #[command(flatten)]
        model: ModelArgs,
        /// Detection threshold; overrides `eval.gamma`.
        #[arg(long)]
        gamma: Option<f64>,
    },
}

fn parse_parameter(s: &str) -> Result<TuningParameter, String> {
    s.parse().map_err(|e: dstmd::Error| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen { spec, out, seed } => commands::gen(&spec, &out, seed),
        Command::Run { frames, model, gamma } => {
            commands::run(&frames, model.config.as_deref(), model.model.into(), gamma, &model.out)
        }
        Command::Tune { parameter, model, values } => commands::tune(
            parameter,
            values,
            model.config.as_deref(),
            model.model.into(),
            &model.out,
        ),
        Command::Roc { stimulus, model, seed } => {
            commands::roc(stimulus.as_deref(), seed, model.config.as_deref(), model.model.into(), &model.out)
        }
        Command::Direction { stimulus, model, gamma } => {
            commands::direction(stimulus.as_deref(), model.config.as_deref(), model.model.into(), gamma, &model.out)
        }
    };
    match result {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
