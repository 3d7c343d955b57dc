//! Command-line front end: synthesize data, inspect and convert recordings,
//! encode segments to images, train, evaluate and benchmark.
//!
//! Exit status is 0 on success, 1 for invalid input or options and 2 for
//! filesystem failures.

pub mod commands;
pub mod config;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use faultcnn::encoders::{EncodeError, ExportError, Method, WindowSelect};
use faultcnn::eval::EvalError;
use faultcnn::ingest::{IngestError, RpmSubset, Scheme};
use faultcnn::nn::NnError;
use faultcnn::signal::SignalError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Clap(#[from] clap::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0} exists and --no-clobber is set")]
    Clobber(String),
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        let io = match self {
            CliError::Io { .. } | CliError::Clobber(_) => true,
            CliError::Ingest(e) => matches!(e, IngestError::Io { .. }),
            CliError::Nn(e) => matches!(e, NnError::Io { .. }),
            CliError::Eval(e) => e.is_io(),
            _ => false,
        };
        if io {
            2
        } else {
            1
        }
    }
}

impl From<ExportError> for CliError {
    fn from(e: ExportError) -> Self {
        match e {
            ExportError::Io(source) => CliError::Io {
                path: "image output".into(),
                source,
            },
            other => CliError::Usage(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "faultcnn",
    version,
    about = "Bearing fault identification from vibration images"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write synthetic bearing recordings and a manifest.
    Synth(SynthArgs),
    /// Check the files listed in a manifest and optionally convert them.
    Ingest(IngestArgs),
    /// Encode every segment of one recording as an image.
    Encode(EncodeArgs),
    /// Train a classifier and score it on the held-out split.
    Train(TrainArgs),
    /// Score a saved model on a freshly assembled test split.
    Eval(EvalArgs),
    /// Single-image latency for each trained encoding.
    Bench(BenchArgs),
}

/// Flags shared by every command.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Seed for every random choice.
    #[arg(long)]
    pub seed: Option<u64>,
    /// key=value option file; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Fail instead of overwriting existing outputs.
    #[arg(long)]
    pub no_clobber: bool,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SynthArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// 4 (one fault size per location) or 10 (every fault size).
    #[arg(long)]
    pub classes: Option<usize>,
    /// Seconds per recording.
    #[arg(long)]
    pub duration: Option<f64>,
    /// 1730, 1750, 1772, 1797 or all.
    #[arg(long)]
    pub rpm: Option<RpmSubset>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct IngestArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Manifest of `path,condition,diameter,rpm` lines.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub segment_len: Option<usize>,
}

/// How segments become images.
#[derive(Debug, Clone, Default, Args)]
pub struct EncodingArgs {
    /// pixel, gasf, mtf, rp or gafmtf.
    #[arg(long)]
    pub method: Option<Method>,
    /// Image side; defaults to 31 for pixel and 256 otherwise.
    #[arg(long)]
    pub side: Option<usize>,
    /// MTF quantile bins.
    #[arg(long)]
    pub bins: Option<usize>,
    /// prefix or decimate.
    #[arg(long)]
    pub window: Option<WindowSelect>,
    /// MTF mean-pooling width (1 = off).
    #[arg(long)]
    pub fuzzy_kernel: Option<usize>,
    #[arg(long)]
    pub segment_len: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct EncodeArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub encoding: EncodingArgs,
    /// Recording to encode (.mat, .csv/.txt or raw little-endian f64).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Encode at most this many segments.
    #[arg(long)]
    pub limit: Option<usize>,
}

/// Which data an experiment draws.
#[derive(Debug, Clone, Default, Args)]
pub struct DataArgs {
    /// Manifest of `path,condition,diameter,rpm` lines.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// four or ten.
    #[arg(long)]
    pub scheme: Option<Scheme>,
    /// 1730, 1750, 1772, 1797 or all.
    #[arg(long)]
    pub rpm: Option<RpmSubset>,
    #[arg(long)]
    pub segments_per_class: Option<usize>,
    #[arg(long)]
    pub sample_rate: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub encoding: EncodingArgs,
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub encoding: EncodingArgs,
    #[command(flatten)]
    pub data: DataArgs,
    /// Model file written by `train`.
    #[arg(long)]
    pub model: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Directory holding `<method>.vcnn` models.
    #[arg(long)]
    pub models: Option<PathBuf>,
    /// Manifest to take the benchmark segment from; synthetic when absent.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub repetitions: Option<usize>,
    #[arg(long)]
    pub warmup: Option<usize>,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_args<I, T>(args: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args)?;
    run(cli)
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let stdout = &mut std::io::stdout().lock();
    match cli.command {
        Command::Synth(a) => commands::cmd_synth(&a, stdout),
        Command::Ingest(a) => commands::cmd_ingest(&a, stdout),
        Command::Encode(a) => commands::cmd_encode(&a, stdout),
        Command::Train(a) => commands::cmd_train(&a, stdout).map(|_| ()),
        Command::Eval(a) => commands::cmd_eval(&a, stdout).map(|_| ()),
        Command::Bench(a) => commands::cmd_bench(&a, stdout).map(|_| ()),
    }
}
