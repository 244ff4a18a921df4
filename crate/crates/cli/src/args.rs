use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

const ORDER_CONVENTION: &str = concat!(
    env!("CARGO_PKG_VERSION"),
    "\nranking order: the m! rankings are indexed lexicographically by their sequence of",
    "\nalternatives, so index 0 (p1) is A1>A2>…>Am and index m!−1 is Am>…>A1;",
    "\nfor m = 3: p1 A1>A2>A3, p2 A1>A3>A2, p3 A2>A1>A3, p4 A2>A3>A1, p5 A3>A1>A2, p6 A3>A2>A1"
);

/// Coalitional manipulability of scoring-rule elections.
#[derive(Debug, Parser)]
#[command(name = "manip", version, long_version = ORDER_CONVENTION, args_override_self = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide which coalitions can manipulate a profile.
    Check(CheckArgs),
    /// Build (or validate) explicit strategic ballots for a coalition.
    Witness(WitnessArgs),
    /// Monte Carlo share of manipulable profiles under IAC.
    Estimate(EstimateArgs),
    /// Print the symbolic inequality system of a coalition.
    EmitSystem(EmitArgs),
    /// Agreement report between the closed-form test and the LP oracle.
    Compare(CompareArgs),
    /// Exhaustive search for a finite electorate.
    Finite(FiniteArgs),
    /// Reproduce the plurality/antiplurality/Borda tables for m = 3, 4, 5.
    Tables(TablesArgs),
}

#[derive(Debug, Args)]
pub struct RuleArgs {
    /// `plurality`, `borda`, `antiplurality` or comma-separated weights.
    #[arg(long)]
    pub rule: String,
    /// Number of alternatives for named rules (taken from the profile when one is given).
    #[arg(long)]
    pub alts: Option<usize>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub rule: RuleArgs,
    /// Profile JSON: `{"m": 4, "shares"|"sparse"|"counts": …}`.
    #[arg(long)]
    pub profile: PathBuf,
    /// Unifying alternative (1-based); all coalitions when omitted.
    #[arg(long)]
    pub coalition: Option<usize>,
    /// Bounded coalition mass.
    #[arg(long)]
    pub cap: Option<String>,
    /// Participating members as `{"A2>A1>A3": "1/9", …}` (with --cap).
    #[arg(long, requires = "cap")]
    pub selection: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct WitnessArgs {
    #[command(flatten)]
    pub rule: RuleArgs,
    #[arg(long)]
    pub profile: PathBuf,
    #[arg(long)]
    pub coalition: usize,
    /// Fixed ε for every split step.
    #[arg(long)]
    pub epsilon: Option<String>,
    /// Validate the branches in this JSON file instead of building them.
    #[arg(long)]
    pub validate: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub rule: RuleArgs,
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// `relabel` or `filter`.
    #[arg(long, default_value = "relabel")]
    pub mode: String,
    #[arg(long)]
    pub cap: Option<String>,
    /// Worker threads (0 = all cores).
    #[arg(long, env = "MANIP_THREADS", default_value_t = 0)]
    pub threads: usize,
    /// Output file; `.csv` selects CSV, anything else JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Force `csv` or `json` on stdout.
    #[arg(long)]
    pub format: Option<String>,
}

#[derive(Debug, Args)]
pub struct EmitArgs {
    #[command(flatten)]
    pub rule: RuleArgs,
    /// Unifying alternative (1-based, ≥ 2); all when omitted.
    #[arg(long)]
    pub coalition: Option<usize>,
    /// `text`, `latex` or `json`.
    #[arg(long, default_value = "text")]
    pub format: String,
    /// Also expand the sorted-gap lines over every gap order (m ≤ 6).
    #[arg(long)]
    pub expand: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub rule: RuleArgs,
    #[arg(long, default_value_t = 1000)]
    pub samples: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Profiles are drawn on the grid 1/resolution.
    #[arg(long, default_value_t = 1_000_000)]
    pub resolution: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FiniteArgs {
    /// Voter counts per ranking, comma-separated, in canonical order.
    #[arg(long)]
    pub counts: String,
    /// Weight vector, e.g. `1,0.9,0`.
    #[arg(long, conflicts_with = "rule")]
    pub weights: Option<String>,
    /// Named rule instead of explicit weights.
    #[arg(long)]
    pub rule: Option<String>,
    #[arg(long)]
    pub coalition: usize,
    /// At most this many coalition members take part.
    #[arg(long)]
    pub cap: Option<u64>,
    /// Allow every ballot, not only those ranking the unifying alternative first.
    #[arg(long)]
    pub all_ballots: bool,
    /// Maximum number of anonymous strategies to enumerate.
    #[arg(long)]
    pub limit: Option<u128>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TablesArgs {
    #[arg(long, default_value_t = 10_000_000)]
    pub samples_m3: u64,
    #[arg(long, default_value_t = 8_000_000)]
    pub samples_m4: u64,
    #[arg(long, default_value_t = 800_000)]
    pub samples_m5: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value = "relabel")]
    pub mode: String,
    #[arg(long, env = "MANIP_THREADS", default_value_t = 0)]
    pub threads: usize,
    /// Directory for `table_m3.csv`, `table_m4.csv`, `table_m5.csv`;
    /// stdout when omitted.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}
