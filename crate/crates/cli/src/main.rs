//! `spikedx`: data preparation, GSN encoding, network training and the
//! population-decoding experiments from one binary.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};

use crate::config::config_help;

/// Exit status of bad input: config, CSV schema or model file.
pub const EXIT_SCHEMA: u8 = 2;
/// Exit status of GSN or spike encoding failures.
pub const EXIT_ENCODE: u8 = 3;
/// Exit status of a failed training run or experiment.
pub const EXIT_EXPERIMENT: u8 = 4;
const EXIT_OTHER: u8 = 1;

/// An error together with the exit status it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

pub type CmdResult<T> = Result<T, Failure>;

pub trait OrExit<T> {
    fn or_exit(self, code: u8) -> CmdResult<T>;
}

impl<T, E: Into<anyhow::Error>> OrExit<T> for Result<T, E> {
    fn or_exit(self, code: u8) -> CmdResult<T> {
        self.map_err(|e| Failure { code, error: e.into() })
    }
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        Self {
            code: EXIT_OTHER,
            error,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "spikedx",
    version,
    about = "Population decoding workbench for winner-take-all spiking networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Options shared by every subcommand.
#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Master seed; every random stream is derived from it.
    #[arg(long, env = "SPIKEDX_SEED", default_value_t = 0)]
    pub seed: u64,
    /// TOML configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Directory receiving every output file.
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
    /// Worker threads for experiment cells (default: all cores).
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Override one config key, e.g. `--set network.learning_rate=0.02`. Repeatable.
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    pub set: Vec<String>,
    /// Topology preset: paper, paper-16 or reduced.
    #[arg(long)]
    pub preset: Option<String>,
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = ArgAction::Count)]
    pub verbose: u8,
}

/// Where the samples come from.
#[derive(Args, Debug, Clone)]
pub struct DataArgs {
    /// Dataset CSV: `sample_id`, numeric features, `label`.
    #[arg(long, required_unless_present = "synthetic", conflicts_with = "synthetic")]
    pub data: Option<PathBuf>,
    /// Generate the dataset described by the `[synthetic]` config section.
    #[arg(long)]
    pub synthetic: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum BiasMode {
    /// Assignment from the fold's training responses.
    TrainSet,
    /// Assignment from the scored test subset itself.
    TestSet,
}

#[derive(Subcommand)]
enum Command {
    /// Variance filter and mRMR ranking; writes the selected dataset and a ranking report.
    #[command(after_help = config_help(&["selection", "synthetic"]))]
    Prepare {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        data: DataArgs,
        /// Number of mRMR-ranked features to keep.
        #[arg(long)]
        top_k: Option<usize>,
        #[arg(long)]
        variance_threshold: Option<f64>,
    },
    /// Fit (or load) the SOM layout and write one PBM image per sample.
    #[command(after_help = config_help(&["synthetic", "gsn", "encoder"]))]
    Encode {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        data: DataArgs,
        /// Reuse a layout CSV instead of training the SOM.
        #[arg(long)]
        layout: Option<PathBuf>,
        /// Also write one dense spike-train CSV per sample.
        #[arg(long)]
        dump_spikes: bool,
    },
    /// Train the network on every sample and save model, layout, assignment and readout.
    #[command(after_help = config_help(&["synthetic", "gsn", "encoder", "network", "training"]))]
    Train {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        epochs: Option<usize>,
        /// Accept zero training epochs.
        #[arg(long)]
        allow_untrained: bool,
    },
    /// Score a trained model on a dataset with every configured decoder.
    #[command(after_help = config_help(&["synthetic", "gsn", "encoder", "experiment"]))]
    Eval {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        data: DataArgs,
        /// Output directory of a `train` run. Its config.toml is used unless --config is given.
        #[arg(long)]
        model_dir: PathBuf,
        #[arg(long)]
        allow_untrained: bool,
    },
    /// Cross-validated decoder scores over the class-ratio grid.
    #[command(after_help = config_help(&["synthetic", "gsn", "encoder", "network", "training", "experiment"]))]
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// The sweep plus the correlation of training and assignment class ratios.
    #[command(after_help = config_help(&["synthetic", "gsn", "encoder", "network", "training", "experiment"]))]
    Assign {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Untrained-network accuracy over random test subsets.
    #[command(after_help = config_help(&["synthetic", "gsn", "encoder", "network", "experiment"]))]
    Bias {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        data: DataArgs,
        /// Comma-separated subset sizes, e.g. 1,2,4,8.
        #[arg(long, value_delimiter = ',')]
        subset_sizes: Option<Vec<usize>>,
        #[arg(long)]
        folds: Option<usize>,
        #[arg(long)]
        repetitions: Option<usize>,
        /// Where the neuron-class assignment comes from.
        #[arg(long, value_enum)]
        bias_mode: Option<BiasMode>,
    },
    /// Full pipeline per feature group plus the logistic k-sweep.
    #[command(after_help = config_help(&["synthetic", "gsn", "encoder", "network", "training", "experiment"]))]
    Ablate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        folds: Option<usize>,
        #[arg(long)]
        epochs: Option<usize>,
        /// Comma-separated group names to run (default: all).
        #[arg(long, value_delimiter = ',')]
        groups: Option<Vec<String>>,
        /// Without configured groups, split columns into all / informative /
        /// noise, the first N being informative.
        #[arg(long)]
        informative: Option<usize>,
        /// Per-fold mRMR columns kept within each group (0 keeps the group).
        #[arg(long)]
        ablation_top_k: Option<usize>,
    },
}

/// Grid flags of `sweep` and `assign`.
#[derive(Args, Debug, Clone)]
pub struct GridArgs {
    /// Comma-separated class ratios; `native` trains on the fold as is.
    #[arg(long, value_delimiter = ',')]
    pub alpha_grid: Option<Vec<String>>,
    #[arg(long)]
    pub folds: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Comma-separated decoders: wta, population_vector, class_average, firing_average, logistic.
    #[arg(long, value_delimiter = ',')]
    pub decoders: Option<Vec<String>>,
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
}

fn run(cli: Cli) -> CmdResult<()> {
    use commands as c;
    match cli.command {
        Command::Prepare {
            common,
            data,
            top_k,
            variance_threshold,
        } => c::prepare(&common, &data, top_k, variance_threshold),
        Command::Encode {
            common,
            data,
            layout,
            dump_spikes,
        } => c::encode(&common, &data, layout.as_deref(), dump_spikes),
        Command::Train {
            common,
            data,
            epochs,
            allow_untrained,
        } => c::train(&common, &data, epochs, allow_untrained),
        Command::Eval {
            common,
            data,
            model_dir,
            allow_untrained,
        } => c::eval(&common, &data, &model_dir, allow_untrained),
        Command::Sweep { common, data, grid } => c::sweep(&common, &data, &grid, false),
        Command::Assign { common, data, grid } => c::sweep(&common, &data, &grid, true),
        Command::Bias {
            common,
            data,
            subset_sizes,
            folds,
            repetitions,
            bias_mode,
        } => c::bias(&common, &data, subset_sizes, folds, repetitions, bias_mode),
        Command::Ablate {
            common,
            data,
            folds,
            epochs,
            groups,
            informative,
            ablation_top_k,
        } => c::ablate(&common, &data, folds, epochs, groups, informative, ablation_top_k),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let verbose = match &cli.command {
        Command::Prepare { common, .. }
        | Command::Encode { common, .. }
        | Command::Train { common, .. }
        | Command::Eval { common, .. }
        | Command::Sweep { common, .. }
        | Command::Assign { common, .. }
        | Command::Bias { common, .. }
        | Command::Ablate { common, .. } => common.verbose,
    };
    init_logging(verbose);
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
