mod collect;
mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::{FileConfig, Format};
use crate::error::CliResult;

#[derive(Debug, Parser)]
#[command(name = "affect-fuzzy", version, about = "Fuzzy multi-level emotion estimation from interaction behaviour")]
struct Cli {
    /// `key = value` configuration file; flags override its values.
    #[arg(long, global = true, env = "AFFECT_FUZZY_CONFIG")]
    config: Option<PathBuf>,
    /// Seed for data generation and training.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output format.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print a co-occurrence table, an interpolated profile or a regional profile.
    Tables(TablesArgs),
    /// Show the 5-class membership of continuous levels.
    Fuzzify(FuzzifyArgs),
    /// Record one experience-sampling self-report.
    Collect(CollectArgs),
    /// Generate a synthetic dataset of reports and sessions.
    Synth(SynthArgs),
    /// Extract behavioural features from session logs.
    Extract(ExtractArgs),
    /// Train a model from features and self-reports.
    Train(TrainArgs),
    /// Predict emotion states for sessions.
    Predict(PredictArgs),
    /// Score predictions against self-reports.
    Eval(EvalArgs),
}

#[derive(Debug, Args)]
pub struct TablesArgs {
    /// Anchor emotion: joy, anticipation, anger, fear or acceptance.
    pub anchor: String,
    /// Anchor level in [0, 4]; prints the interpolated profile.
    #[arg(long)]
    pub level: Option<f64>,
    /// Regional profile (europe, middle_east, south_east_asia); needs --level.
    #[arg(long)]
    pub region: Option<String>,
    /// Print CSV regardless of --format.
    #[arg(long)]
    pub csv: bool,
    /// Print chart series as CSV: one line per sampled level, or per emotion with --level.
    #[arg(long)]
    pub plot_data: bool,
    /// Level step of the --plot-data series.
    #[arg(long, default_value_t = 0.25)]
    pub step: f64,
    /// Plausibility check of `<emotion>=<level>` against the profile at --level.
    #[arg(long, value_name = "EMOTION=LEVEL")]
    pub check: Option<String>,
    /// Plausibility tolerance in levels.
    #[arg(long)]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Args)]
pub struct FuzzifyArgs {
    /// Levels in [0, 4], or percentages with --percent.
    #[arg(required = true, allow_negative_numbers = true)]
    pub values: Vec<f64>,
    #[arg(long)]
    pub percent: bool,
}

#[derive(Debug, Args)]
pub struct CollectArgs {
    /// Report file to append to.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub participant: String,
    #[arg(long)]
    pub region: Option<String>,
    /// Hours until the next prompt.
    #[arg(long, default_value_t = 4.0)]
    pub interval: f64,
    /// Scripted answers, one `emotion = level` per line.
    #[arg(long)]
    pub answers: Option<PathBuf>,
    /// Interaction events to copy into the session log.
    #[arg(long, requires = "session_log")]
    pub replay: Option<PathBuf>,
    /// Session log to append replayed events to.
    #[arg(long)]
    pub session_log: Option<PathBuf>,
    /// Report timestamp in ms since the epoch, instead of the clock.
    #[arg(long)]
    pub now: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Directory for reports.jsonl, sessions.jsonl and manifest.json.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    pub participants: Option<u32>,
    /// Sessions per participant.
    #[arg(long)]
    pub sessions: Option<u32>,
    /// Standard deviation of the level noise.
    #[arg(long)]
    pub noise: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[arg(long)]
    pub sessions: PathBuf,
    /// Output file; stdout if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Drop inconsistent events instead of failing.
    #[arg(long)]
    pub lenient: bool,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long)]
    pub reports: Option<PathBuf>,
    /// Model file to write.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// SVM regularisation constant.
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub epochs: Option<u32>,
    /// Softmax temperature.
    #[arg(long)]
    pub temperature: Option<f64>,
    /// linear, quadratic or rbf.
    #[arg(long)]
    pub kernel: Option<String>,
    /// RBF width.
    #[arg(long, default_value_t = 0.2)]
    pub gamma: f64,
    /// RBF random feature count.
    #[arg(long, default_value_t = 256)]
    pub components: u32,
    /// Join window between a report and its sessions, in hours.
    #[arg(long, default_value_t = 4.0)]
    pub window: f64,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Extracted features.
    #[arg(long, conflicts_with = "sessions", required_unless_present = "sessions")]
    pub features: Option<PathBuf>,
    /// Raw session logs, extracted on the fly.
    #[arg(long)]
    pub sessions: Option<PathBuf>,
    /// Output file; stdout if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Predictions, or self-report lines used as crisp predictions.
    #[arg(long)]
    pub predictions: PathBuf,
    /// Self-reports holding the ground truth.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Detection threshold on the defuzzified level.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Print the confusion matrix as CSV.
    #[arg(long)]
    pub csv: bool,
    /// Join window between a report and its predictions, in hours.
    #[arg(long, default_value_t = 4.0)]
    pub window: f64,
}

/// Global settings after merging the config file and flags.
#[derive(Debug, Clone)]
pub struct Context {
    pub file: FileConfig,
    pub seed: Option<u64>,
    pub format: Format,
}

fn run(cli: Cli) -> CliResult {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let ctx = Context {
        seed: cli.seed.or(file.seed),
        format: cli.format.or(file.format).unwrap_or_default(),
        file,
    };
    match cli.command {
        Command::Tables(a) => commands::tables(&ctx, a),
        Command::Fuzzify(a) => commands::fuzzify(&ctx, a),
        Command::Collect(a) => collect::collect(&ctx, a),
        Command::Synth(a) => commands::synth(&ctx, a),
        Command::Extract(a) => commands::extract(&ctx, a),
        Command::Train(a) => commands::train(&ctx, a),
        Command::Predict(a) => commands::predict(&ctx, a),
        Command::Eval(a) => commands::eval(&ctx, a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
