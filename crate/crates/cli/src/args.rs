use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use etcausal::{BinStrategy, LogBase};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "etcausal",
    version,
    about = "Information and compression-complexity measures for symbolic time series"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute measures for the selected columns of a CSV file.
    Measure(MeasureArgs),
    /// Recompute the three-neuron tables and check them against their targets.
    ReproducePaper(ReproduceArgs),
    /// Autocorrelation of each selected column (plot-ready with --format csv).
    Acf(AcfArgs),
    /// Quantize columns into symbols and emit the encoding table.
    Quantize(QuantizeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Entropy,
    Mi,
    Metc,
    Etc,
    Te,
    Acf,
    Corr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Strategy {
    EqualWidth,
    EqualFrequency,
}

impl From<Strategy> for BinStrategy {
    fn from(s: Strategy) -> Self {
        match s {
            Strategy::EqualWidth => BinStrategy::EqualWidth,
            Strategy::EqualFrequency => BinStrategy::EqualFrequency,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Base {
    #[value(name = "2")]
    Two,
    #[value(name = "e")]
    E,
}

impl From<Base> for LogBase {
    fn from(b: Base) -> Self {
        match b {
            Base::Two => LogBase::Two,
            Base::E => LogBase::E,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// CSV file with a header row, one column per series.
    #[arg(long)]
    pub input: PathBuf,
    /// Comma-separated column names; defaults to every column.
    #[arg(long, value_delimiter = ',')]
    pub columns: Vec<String>,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Report destination; standard output when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SymbolArgs {
    /// Number of quantization bins.
    #[arg(long, default_value_t = 3)]
    pub bins: u32,
    #[arg(long, value_enum, default_value = "equal-width")]
    pub strategy: Strategy,
    /// Treat integer-valued columns as labels and skip quantization.
    #[arg(long)]
    pub symbolic: bool,
}

#[derive(Debug, Clone, Args)]
pub struct TeArgs {
    /// History length for both series (ACF: largest lag, default 20).
    #[arg(long)]
    pub lags: Option<usize>,
    /// Source history length; overrides --lags.
    #[arg(long)]
    pub source_lags: Option<usize>,
    /// Target history length; overrides --lags.
    #[arg(long)]
    pub target_lags: Option<usize>,
    #[arg(long, value_enum, default_value = "2")]
    pub base: Base,
    /// Permutation surrogates for the TE significance test; 0 disables it.
    #[arg(long, default_value_t = 0)]
    pub surrogates: usize,
    #[arg(long, default_value_t = 0.05)]
    pub level: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct MeasureArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Measures to compute; comma-separated.
    #[arg(long, value_enum, value_delimiter = ',', required = true)]
    pub kind: Vec<Kind>,
    #[command(flatten)]
    pub symbols: SymbolArgs,
    #[command(flatten)]
    pub te: TeArgs,
    /// TE source column; restricts TE to this direction.
    #[arg(long, requires = "target")]
    pub source: Option<String>,
    /// TE target column.
    #[arg(long, requires = "source")]
    pub target: Option<String>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ReproduceArgs {
    /// System file (columns X1,X2,X3); the bundled canonical system when omitted.
    #[arg(long, conflicts_with = "search")]
    pub input: Option<PathBuf>,
    /// Regenerate the system with the exhaustive constraint search.
    #[arg(long)]
    pub search: bool,
    /// With --search, also write the selected system as CSV here.
    #[arg(long, requires = "search")]
    pub system_output: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    pub surrogates: usize,
    #[arg(long, default_value_t = 0.05)]
    pub level: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct AcfArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Largest lag.
    #[arg(long, default_value_t = 20)]
    pub lags: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct QuantizeArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub symbols: SymbolArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}
