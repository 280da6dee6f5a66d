mod commands;
mod input;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hurstkit::series::ColumnRef;

use report::CliError;

#[derive(Parser, Debug)]
#[command(
    name = "hurstkit",
    version,
    about = "Hurst exponent, V statistic and downfall analysis of price series"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Full-series Hurst exponent with its scaling curve.
    Hurst(HurstArgs),
    /// Same as `hurst --estimator dfa`.
    Dfa(HurstArgs),
    /// Rolling-window Hurst trace, summary and market class.
    Rolling(RollingArgs),
    /// V statistic curve and its trend.
    Vstat(VstatArgs),
    /// Downfall episodes, rank-size table and kurtosis scan.
    Downfalls(DownfallArgs),
    /// Seeded synthetic series as CSV on standard output.
    Synth(SynthArgs),
}

#[derive(Args, Debug, Clone)]
pub struct InputArgs {
    /// CSV file; `-` or nothing reads standard input.
    pub input: Option<PathBuf>,
    /// The value column already holds returns instead of closing prices.
    #[arg(long)]
    pub returns: bool,
    #[arg(long, default_value = "0")]
    pub date_column: ColumnRef,
    #[arg(long, default_value = "1")]
    pub close_column: ColumnRef,
    #[arg(long, default_value = ",")]
    pub delimiter: char,
    #[arg(long, default_value = "%Y-%m-%d")]
    pub date_format: String,
    #[arg(long, default_value = "SERIES")]
    pub symbol: String,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Table,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorArg {
    Rs,
    Dfa,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransformArg {
    Raw,
    Absolute,
    Squared,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum StdDevArg {
    Population,
    Sample,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitTargetArg {
    Rms,
    Squared,
}

#[derive(Args, Debug, Clone)]
pub struct EstimatorArgs {
    #[arg(long, value_enum, default_value_t = TransformArg::Raw)]
    pub transform: TransformArg,
    /// Segment lengths for R/S: `divisors`, `schedule250` or a comma list.
    #[arg(long)]
    pub plan: Option<String>,
    #[arg(long, default_value_t = hurstkit::rs::DEFAULT_MIN_SEGMENT)]
    pub min_segment: usize,
    #[arg(long, value_enum, default_value_t = StdDevArg::Population)]
    pub std_dev: StdDevArg,
    /// DFA box sizes as a comma list; powers of two by default.
    #[arg(long, value_delimiter = ',')]
    pub box_sizes: Vec<usize>,
    #[arg(long, value_enum, default_value_t = FitTargetArg::Rms)]
    pub fit_target: FitTargetArg,
    /// Fit DFA on the raw values instead of their cumulative profile.
    #[arg(long)]
    pub no_integrate: bool,
}

#[derive(Args, Debug, Clone)]
pub struct HurstArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub estimation: EstimatorArgs,
    #[arg(long, value_enum, default_value_t = EstimatorArg::Rs)]
    pub estimator: EstimatorArg,
    /// Half-width around 0.5 labelled random. R/S reads white noise at
    /// roughly 0.55 on a few thousand points, hence the wide default.
    #[arg(long, default_value_t = 0.1)]
    pub random_band: f64,
}

#[derive(Args, Debug, Clone)]
pub struct RollingArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub estimation: EstimatorArgs,
    #[arg(long, value_enum, default_value_t = EstimatorArg::Rs)]
    pub estimator: EstimatorArg,
    #[arg(long, default_value_t = hurstkit::rolling::FIGURE_PRESET.0)]
    pub window: usize,
    #[arg(long, default_value_t = hurstkit::rolling::FIGURE_PRESET.1)]
    pub lag: usize,
    #[arg(long, value_delimiter = ',', default_values_t = hurstkit::rolling::DEFAULT_CUTS)]
    pub cuts: Vec<f64>,
}

#[derive(Args, Debug, Clone)]
pub struct VstatArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub estimation: EstimatorArgs,
    /// Input is a `scale,rs` table rather than a series.
    #[arg(long)]
    pub curve: bool,
    /// Band on the slope of V against ln n, relative to mean V.
    #[arg(long, default_value_t = hurstkit::vstat::DEFAULT_FLAT_TOLERANCE)]
    pub tolerance: f64,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum DepthArg {
    Log,
    Percent,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum KurtosisArg {
    Population,
    Sample,
}

#[derive(Args, Debug, Clone)]
pub struct DownfallArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value_t = hurstkit::downfall::DEFAULT_LOOKBACK)]
    pub lookback: usize,
    #[arg(long, default_value_t = 0.0)]
    pub min_depth: f64,
    /// Include an episode still open at the end of the series in the scan.
    #[arg(long)]
    pub include_open: bool,
    #[arg(long, value_enum, default_value_t = DepthArg::Log)]
    pub depth: DepthArg,
    #[arg(long, value_enum, default_value_t = KurtosisArg::Population)]
    pub kurtosis: KurtosisArg,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthKind {
    White,
    Fgn,
    Fbm,
    Walk,
}

#[derive(Args, Debug, Clone)]
pub struct SynthArgs {
    #[arg(long, value_enum)]
    pub kind: SynthKind,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0.5)]
    pub h: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Per-step drift of the log price.
    #[arg(long, default_value_t = 0.0)]
    pub drift: f64,
    /// Per-step scale of the log price increments.
    #[arg(long, default_value_t = 0.01)]
    pub vol: f64,
    #[arg(long, default_value_t = 100.0)]
    pub p0: f64,
    /// Emit the generated values as `date,value` instead of a price path.
    #[arg(long)]
    pub raw: bool,
}

fn run(command: Command, args: Vec<String>) -> Result<String, CliError> {
    match command {
        Command::Hurst(a) => commands::hurst("hurst", a, args),
        Command::Dfa(mut a) => {
            a.estimator = EstimatorArg::Dfa;
            commands::hurst("dfa", a, args)
        }
        Command::Rolling(a) => commands::rolling(a, args),
        Command::Vstat(a) => commands::vstat(a, args),
        Command::Downfalls(a) => commands::downfalls(a, args),
        Command::Synth(a) => commands::synth(a),
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = CliError::config("usage", e.render().to_string().trim_end());
            eprintln!("{}", err.to_json());
            return ExitCode::from(err.exit_code() as u8);
        }
    };
    match run(cli.command, argv.into_iter().skip(1).collect()) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(out.as_bytes()).is_err() {
                return ExitCode::from(report::EXIT_INPUT as u8);
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("{}", err.to_json());
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
