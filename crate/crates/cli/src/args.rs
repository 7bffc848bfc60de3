use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use safecomb::corpus::{CorpusFormat, Indicator};
use safecomb::stats::Adjustment;
use safecomb::synergy::WithoutRule;
use safecomb::tiers::MinNScaling;

pub const OUT_ENV: &str = "SAFECOMB_OUT";

#[derive(Debug, Parser)]
#[command(
    name = "safecomb",
    version,
    about = "Persuasive-element combination analysis over SAFE-coded corpora"
)]
pub struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and validate a corpus, printing the parse report.
    Validate(ValidateArgs),
    /// Fit the density clustering and assign every record.
    Cluster(ClusterArgs),
    /// Cluster profiles, pattern assignment and cosine validation.
    Patterns(PatternsArgs),
    /// Baseline/peripheral combination sweeps.
    Synergy(SynergyArgs),
    /// Follower tiers, per-tier sweeps and complexity comparison.
    Tiers(TiersArgs),
    /// Generate a synthetic corpus with planted structure.
    Simulate(SimulateArgs),
    /// Coder agreement between two label files.
    Agreement(AgreementArgs),
    /// Full pipeline into one report bundle.
    Run(RunArgs),
}

#[derive(Debug, Args, Clone)]
pub struct InputArgs {
    /// Structured run config (TOML); flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Corpus file (JSONL or CSV).
    #[arg(long, short)]
    pub input: Option<PathBuf>,
    #[arg(long, value_parser = parse_format)]
    pub format: Option<CorpusFormat>,
    /// Fill an empty dimension with its absence marker instead of rejecting the row.
    #[arg(long)]
    pub lenient: bool,
    /// Master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Write the parse report here instead of stderr.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args, Clone)]
pub struct ClusterFlags {
    #[arg(long)]
    pub min_cluster_size: Option<usize>,
    #[arg(long)]
    pub min_samples: Option<usize>,
    /// Records in the fitted subsample.
    #[arg(long)]
    pub subsample: Option<usize>,
    /// Seeded refits for the stability report.
    #[arg(long)]
    pub repeats: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub cluster: ClusterFlags,
    /// Model file to write (default: <out>/cluster_model.json).
    #[arg(long)]
    pub model_out: Option<PathBuf>,
    /// Output directory.
    #[arg(long, short, env = OUT_ENV)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PatternsArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub cluster: ClusterFlags,
    /// Previously fitted model; fitted afresh when absent.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Pattern definitions (TOML).
    #[arg(long)]
    pub patterns: Option<PathBuf>,
    #[arg(long, short, env = OUT_ENV)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Clone)]
pub struct SweepFlags {
    /// Largest combination size.
    #[arg(long)]
    pub k_max: Option<usize>,
    /// n_with must exceed this for significance.
    #[arg(long)]
    pub min_n: Option<usize>,
    #[arg(long)]
    pub resamples: Option<usize>,
    /// Confidence level of the bootstrap intervals.
    #[arg(long)]
    pub level: Option<f64>,
    /// Comma-separated indicators.
    #[arg(long, value_delimiter = ',', value_parser = parse_indicator)]
    pub indicators: Option<Vec<Indicator>>,
    /// Baseline name or `all`.
    #[arg(long, default_value = "all")]
    pub baseline: String,
    /// Comparison group: complement or none_of.
    #[arg(long, value_parser = parse_without)]
    pub without: Option<WithoutRule>,
    /// Cap on C(universe, k_max).
    #[arg(long)]
    pub budget: Option<u64>,
    /// resamples 500, level 0.95, min_n 300, k_max 4.
    #[arg(long)]
    pub paper_defaults: bool,
}

#[derive(Debug, Args)]
pub struct SynergyArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub sweep: SweepFlags,
    /// effects.csv path; complexity.csv and combinations.csv go next to it.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Clone)]
pub struct TierFlags {
    #[arg(long, value_parser = parse_scaling)]
    pub min_n_scaling: Option<MinNScaling>,
    /// Dunn p-value adjustment: holm, bonferroni or none.
    #[arg(long, value_parser = parse_adjustment)]
    pub adjustment: Option<Adjustment>,
}

#[derive(Debug, Args)]
pub struct TiersArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub sweep: SweepFlags,
    #[command(flatten)]
    pub tiers: TierFlags,
    #[arg(long, short, env = OUT_ENV)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Generator spec (JSON); built-in four-pattern corpus when absent.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Overrides the spec's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Corpus output; CSV when the extension is .csv, JSONL otherwise.
    #[arg(long, short)]
    pub out: PathBuf,
    /// Ground-truth manifest output.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct AgreementArgs {
    pub labels_a: PathBuf,
    pub labels_b: PathBuf,
    /// Write the JSON report here as well as printing the summary.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub cluster: ClusterFlags,
    #[command(flatten)]
    pub sweep: SweepFlags,
    #[command(flatten)]
    pub tiers: TierFlags,
    /// Skip the tier stage.
    #[arg(long)]
    pub no_tiers: bool,
    #[arg(long)]
    pub patterns: Option<PathBuf>,
    #[arg(long, short, env = OUT_ENV)]
    pub out: Option<PathBuf>,
}

fn parse_format(s: &str) -> Result<CorpusFormat, String> {
    s.parse().map_err(|e: safecomb::Error| e.to_string())
}

fn parse_indicator(s: &str) -> Result<Indicator, String> {
    s.parse().map_err(|e: safecomb::Error| e.to_string())
}

fn parse_adjustment(s: &str) -> Result<Adjustment, String> {
    s.parse().map_err(|e: safecomb::Error| e.to_string())
}

fn parse_without(s: &str) -> Result<WithoutRule, String> {
    match s.to_ascii_lowercase().replace('-', "_").as_str() {
        "complement" => Ok(WithoutRule::Complement),
        "none_of" | "none" => Ok(WithoutRule::NoneOf),
        other => Err(format!(
            "unknown comparison group {other:?} (complement, none_of)"
        )),
    }
}

fn parse_scaling(s: &str) -> Result<MinNScaling, String> {
    match s.to_ascii_lowercase().as_str() {
        "fixed" => Ok(MinNScaling::Fixed),
        "proportional" => Ok(MinNScaling::Proportional),
        other => Err(format!(
            "unknown min_n scaling {other:?} (fixed, proportional)"
        )),
    }
}
