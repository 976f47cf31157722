//! `litmap`: synthetic data, features, models and maps from the command line.

mod artifacts;
mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use litmap_core::geomap::SurfaceFormat;
use litmap_core::{Error, ErrorKind};

use crate::commands::Context;
use crate::config::RunConfig;

#[derive(Parser, Debug)]
#[command(
    name = "litmap",
    version,
    about = "Predict and map illiteracy from mobile phone metadata"
)]
struct Cli {
    /// Flat `key = value` run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Root seed; overrides `seed` in the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Abort on the first malformed input row instead of skipping it.
    #[arg(long, global = true)]
    strict: bool,

    /// Extra `key=value` settings; they win over the config file.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic labeled population and its operator logs.
    Synth {
        #[arg(long)]
        out: PathBuf,
    },
    /// Build the per-subscriber feature matrix.
    Featurize {
        /// Directory holding cdr, topups, towers, handsets and labels CSVs.
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Split, up-sample, train and evaluate a boosted-tree classifier.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also run k-fold cross-validation on the training rows.
        #[arg(long)]
        folds: Option<usize>,
    },
    /// Score a saved model.
    Evaluate {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        model: PathBuf,
        /// Split file (default: split.csv next to the model).
        #[arg(long)]
        split: Option<PathBuf>,
        /// Score every labeled row instead of the test rows.
        #[arg(long)]
        all: bool,
        /// Report JSON path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Backward feature elimination on generalized cross-validation.
    SelectFeatures {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Interpolate predicted and actual tower rates onto a grid.
    Map {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        split: Option<PathBuf>,
        #[arg(long, default_value = "geojson")]
        format: SurfaceFormat,
        #[arg(long)]
        out: PathBuf,
    },
    /// Per-class histogram of one feature.
    Density {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        feature: String,
        #[arg(long, default_value_t = 30)]
        bins: usize,
        /// Natural log of positive values; others are dropped.
        #[arg(long)]
        log: bool,
        /// Histogram CSV path.
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> litmap_core::Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Invariant(format!("thread pool: {e}")))?;
    }
    let config = RunConfig::load(cli.config.as_deref(), &cli.overrides, cli.seed)?;
    let ctx = Context {
        config,
        config_path: cli.config,
        strict: cli.strict,
    };
    match &cli.command {
        Command::Synth { out } => commands::synth(&ctx, out),
        Command::Featurize { data, out } => commands::featurize(&ctx, data, out),
        Command::Train {
            data,
            features,
            out,
            folds,
        } => {
            if matches!(folds, Some(k) if *k < 2) {
                return Err(Error::Config("--folds must be at least 2".into()));
            }
            commands::train(&ctx, data, features, out, *folds)
        }
        Command::Evaluate {
            data,
            features,
            model,
            split,
            all,
            out,
        } => commands::evaluate_cmd(&ctx, data, features, model, split.as_deref(), *all, out),
        Command::SelectFeatures { data, features, out } => commands::select_features(&ctx, data, features, out),
        Command::Map {
            data,
            features,
            model,
            split,
            format,
            out,
        } => commands::map(&ctx, data, features, model, split.as_deref(), *format, out),
        Command::Density {
            data,
            features,
            feature,
            bins,
            log,
            out,
        } => commands::density(&ctx, data, features, feature, *bins, *log, out),
    }
}

fn exit_code(kind: ErrorKind) -> u8 {
    match kind {
        ErrorKind::Usage => 1,
        ErrorKind::Data => 2,
        ErrorKind::Internal => 3,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .format_target(false)
        .init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(exit_code(e.kind()))
        }
    }
}
