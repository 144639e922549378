//! Command-line entry point: dataset simulation, training, RMSE-vs-SNR
//! sweeps, and source-count accuracy sweeps, all driven by a JSON config.
//!
//! Exit codes: 0 success, 2 config error, 3 missing artifact, 4 runtime or
//! numerical error.

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use aoa_lab::array_model::dataset::{self, DatasetConfig};
use aoa_lab::error::Error;
use aoa_lab::eval::{order_accuracy_sweep, run_sweep};
use aoa_lab::train;

use config::FileConfig;

#[derive(Debug)]
pub enum CliError {
    /// Invalid or unparsable configuration (exit 2).
    Config(String),
    /// A required input file is missing (exit 3).
    MissingArtifact(String),
    /// Runtime or numerical failure (exit 4).
    Runtime(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::MissingArtifact(_) => 3,
            CliError::Runtime(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::MissingArtifact(m) | CliError::Runtime(m) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_) => CliError::Config(e.to_string()),
            Error::Io(ref io) if io.kind() == std::io::ErrorKind::NotFound => {
                CliError::MissingArtifact(e.to_string())
            }
            other => CliError::Runtime(other.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "aoa-lab",
    about = "Single-snapshot angle-of-arrival estimation lab",
    version
)]
struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed override (takes precedence over the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: available cores; AOA_LAB_WORKERS as
    /// fallback).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a snapshot dataset (binary container + JSON sidecar).
    Simulate {
        /// Number of records.
        #[arg(long, default_value_t = 1000)]
        count: u64,
    },
    /// Train the network; writes checkpoints and CSV logs.
    Train {
        /// Resume from this checkpoint.
        #[arg(long, requires = "resume")]
        checkpoint: Option<PathBuf>,
        /// Continue a checkpointed run bit-identically.
        #[arg(long)]
        resume: bool,
    },
    /// Run an RMSE-vs-SNR sweep over the configured methods.
    Eval {
        /// Checkpoint backing the `dnn` method.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Run a source-count accuracy sweep (dnn / mdl / aic).
    Order {
        /// Checkpoint backing the `dnn` method.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

fn init_workers(cli_workers: Option<usize>) -> Result<(), CliError> {
    let workers = cli_workers.or_else(|| {
        std::env::var("AOA_LAB_WORKERS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(n) = workers {
        if n == 0 {
            return Err(CliError::Config("--workers must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    Ok(())
}

fn out_dir(out: &Option<PathBuf>) -> Result<&Path, CliError> {
    out.as_deref()
        .ok_or_else(|| CliError::Config("--out DIR is required".into()))
}

fn load_config(path: &Option<PathBuf>) -> Result<FileConfig, CliError> {
    match path {
        Some(p) => FileConfig::load(p),
        None => Ok(FileConfig::default()),
    }
}

fn echo_effective<T: serde::Serialize>(dir: &Path, effective: &T) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Runtime(e.to_string()))?;
    let json = serde_json::to_vec_pretty(effective)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    std::fs::write(dir.join("effective_config.json"), json)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    Ok(())
}

fn require_file(path: &Path) -> Result<(), CliError> {
    if !path.is_file() {
        return Err(CliError::MissingArtifact(format!(
            "checkpoint not found: {}",
            path.display()
        )));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    init_workers(cli.workers)?;
    let file_config = load_config(&cli.config)?;
    let seed = file_config.seed(cli.seed);

    match cli.command {
        Command::Simulate { count } => {
            let dir = out_dir(&cli.out)?;
            let config = DatasetConfig {
                geometry: file_config.geometry()?,
                distribution: file_config.scene_distribution()?,
                record_count: count,
                seed,
                noise_enabled: file_config.scene_distribution.noise,
            };
            echo_effective(dir, &config)?;
            let ds = dataset::generate(&config)?;
            dataset::write(&ds, &dir.join("dataset.aoa"))?;
            println!(
                "wrote {} records to {}",
                ds.snapshots.len(),
                dir.join("dataset.aoa").display()
            );
        }
        Command::Train {
            checkpoint,
            resume,
        } => {
            let dir = out_dir(&cli.out)?;
            let config = file_config.train_config(seed)?;
            echo_effective(dir, &config)?;
            let outcome = if resume {
                let ckpt = checkpoint.ok_or_else(|| {
                    CliError::Config("--resume requires --checkpoint PATH".into())
                })?;
                require_file(&ckpt)?;
                train::resume(&config, &ckpt, Some(dir))?
            } else {
                train::train(&config, Some(dir))?
            };
            let v = outcome.final_validation;
            println!(
                "trained {} iterations: validation loss {:.4}, accuracy {:.3}",
                config.iterations, v.loss, v.accuracy
            );
        }
        Command::Eval { checkpoint } => {
            let dir = out_dir(&cli.out)?;
            if let Some(c) = &checkpoint {
                require_file(c)?;
            }
            let config = file_config.sweep_config(seed, checkpoint)?;
            echo_effective(dir, &config)?;
            let result = run_sweep(&config)?;
            result.write(&dir.join("sweep.csv"))?;
            println!("wrote {}", dir.join("sweep.csv").display());
        }
        Command::Order { checkpoint } => {
            let dir = out_dir(&cli.out)?;
            if let Some(c) = &checkpoint {
                require_file(c)?;
            }
            let config = file_config.sweep_config(seed, checkpoint)?;
            echo_effective(dir, &config)?;
            let result = order_accuracy_sweep(&config)?;
            result.write(&dir.join("order.csv"))?;
            println!("wrote {}", dir.join("order.csv").display());
        }
    }
    Ok(())
}
