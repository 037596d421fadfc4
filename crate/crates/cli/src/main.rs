use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rcnkit::datasets::MackeyGlassConfig;
use rcnkit_cli::bench::{DIGITS_SIZES, TIMING_SIZES};
use rcnkit_cli::commands::{self, PredictArgs};
use rcnkit_cli::config::{DataFormat, RunConfig};
use rcnkit_cli::error::{exit_code, EXIT_OK, EXIT_USAGE};

#[derive(Parser)]
#[command(name = "rcnkit", version, about = "Reservoir computing toolkit: train, predict, search and benchmark")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a dataset to CSV.
    Generate {
        #[command(subcommand)]
        kind: GenerateKind,
    },
    /// Fit an estimator from a config file and save the model.
    Train(ConfigArgs),
    /// Apply a saved model to a data file.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum, default_value = "table")]
        format: FormatArg,
        /// Trailing target columns in labeled table data.
        #[arg(long, default_value_t = 1)]
        target_columns: usize,
        /// Prediction CSV; printed to stdout for unlabeled data when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the sequential search plan of a config file.
    Search(ConfigArgs),
    /// Reproduce a benchmark table.
    Benchmark {
        #[command(subcommand)]
        name: BenchmarkName,
    },
}

#[derive(Args)]
struct ConfigArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config value, e.g. `--set params.alpha=1e-4`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Args, Clone)]
struct MgArgs {
    #[arg(long, default_value_t = 5000)]
    n: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 17)]
    tau: usize,
    #[arg(long, default_value_t = 1)]
    horizon: usize,
    #[arg(long, default_value_t = 1700)]
    discard: usize,
}

impl MgArgs {
    fn config(&self) -> MackeyGlassConfig {
        MackeyGlassConfig {
            n_timesteps: self.n,
            seed: self.seed,
            tau: self.tau,
            horizon: self.horizon,
            transient_discard: self.discard,
            ..MackeyGlassConfig::default()
        }
    }
}

#[derive(Subcommand)]
enum GenerateKind {
    /// Two-column CSV `x,y` with `y` the series one horizon ahead.
    MackeyGlass {
        #[command(flatten)]
        mg: MgArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// The bundled 8x8 digits (64 pixel columns and a label).
    Digits {
        #[arg(long)]
        out: PathBuf,
    },
    /// HAR features of a one-column series.
    Har {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum BenchmarkName {
    /// Accuracy over reservoir sizes, unidirectional and bidirectional.
    Digits {
        #[arg(long, value_delimiter = ',', default_values_t = DIGITS_SIZES)]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// One-step prediction error against a linear baseline.
    MackeyGlass {
        #[command(flatten)]
        mg: MgArgs,
        #[arg(long, default_value_t = 500)]
        hidden_layer_size: usize,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Rotating folds over three volatility series and three horizons.
    Volatility {
        /// Directory with CAT.csv, EBAY.csv and MSFT.csv.
        #[arg(long)]
        data_dir: Option<PathBuf>,
        /// Seed of the synthetic series used when no data is given.
        #[arg(long, default_value_t = 0)]
        synthetic_seed: u64,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Fit and score wall-clock times over reservoir sizes.
    Timing {
        #[arg(long, value_delimiter = ',', default_values_t = TIMING_SIZES)]
        sizes: Vec<usize>,
        #[command(flatten)]
        mg: MgArgs,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Table,
    Digits,
}

impl From<FormatArg> for DataFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Table => DataFormat::Table,
            FormatArg::Digits => DataFormat::Digits,
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<String> {
    match cli.command {
        Command::Generate { kind } => match kind {
            GenerateKind::MackeyGlass { mg, out } => commands::generate_mackey_glass(&mg.config(), &out),
            GenerateKind::Digits { out } => commands::generate_digits(&out),
            GenerateKind::Har { input, out } => commands::generate_har(&input, &out),
        },
        Command::Train(a) => commands::train(&RunConfig::load(a.config.as_deref(), &a.overrides)?),
        Command::Predict {
            model,
            data,
            format,
            target_columns,
            out,
        } => commands::predict(&PredictArgs {
            model,
            data,
            format: format.into(),
            target_columns,
            out,
        }),
        Command::Search(a) => commands::search(&RunConfig::load(a.config.as_deref(), &a.overrides)?),
        Command::Benchmark { name } => match name {
            BenchmarkName::Digits { sizes, seed, out_dir } => commands::benchmark_digits(&sizes, seed, out_dir.as_deref()),
            BenchmarkName::MackeyGlass {
                mg,
                hidden_layer_size,
                out_dir,
            } => commands::benchmark_mackey_glass(&mg.config(), hidden_layer_size, out_dir.as_deref()),
            BenchmarkName::Volatility {
                data_dir,
                synthetic_seed,
                out_dir,
            } => commands::benchmark_volatility(data_dir.as_deref(), synthetic_seed, out_dir.as_deref()),
            BenchmarkName::Timing { sizes, mg, out_dir } => {
                commands::benchmark_timing(&mg.config(), &sizes, out_dir.as_deref())
            }
        },
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { EXIT_OK as u8 });
        }
    };
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
