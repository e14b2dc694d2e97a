//! Command-line flags.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "mlcs", version, about = "Beam search for the multiple longest common subsequence problem")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one instance.
    Solve(SolveArgs),
    /// Run several heuristics over every dataset of a manifest and write a CSV.
    Sweep(SweepArgs),
    /// Print p(k, n) or q(k, n) for a range of k.
    Probe(ProbeArgs),
    /// Beam length for each constant k in a range.
    Ksweep(KsweepArgs),
    /// Median solve time per dataset and heuristic.
    Timing(TimingArgs),
    /// Exact LCS length for small instances.
    Oracle(OracleArgs),
    /// Compare every p(k, n) evaluation route on a grid.
    Crossval(CrossvalArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenFamily {
    Uncorr,
    Corr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FileFormat {
    Plain,
    Fasta,
}

/// Where an instance comes from: a file or a generator.
#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Dataset file.
    #[arg(long, conflicts_with = "gen", required_unless_present = "gen")]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FileFormat::Plain)]
    pub format: FileFormat,
    /// Alphabet for FASTA input.
    #[arg(long, default_value = "ACGT")]
    pub alphabet: String,
    /// Keep only this many leading symbols of each FASTA record.
    #[arg(long)]
    pub truncate: Option<usize>,
    /// Generate the instance instead of reading it.
    #[arg(long, value_enum)]
    pub gen: Option<GenFamily>,
    /// Alphabet size of a generated instance.
    #[arg(long, requires = "gen")]
    pub sigma: Option<usize>,
    /// Number of generated strings.
    #[arg(long = "n", requires = "gen")]
    pub n: Option<usize>,
    /// Length of each generated string.
    #[arg(long = "len", requires = "gen")]
    pub len: Option<usize>,
    /// Seed of the generator; required with --gen.
    #[arg(long, requires = "gen")]
    pub seed: Option<u64>,
    /// Per-position mutation rate of the correlated generator.
    #[arg(long, default_value_t = 0.1)]
    pub rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Uncorr,
    Corr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, ValueEnum)]
pub enum HeuristicArg {
    Minlen,
    Kguess,
    /// The analytic k rule for the dataset's family.
    Kanalytic,
    KanalyticUncorr,
    KanalyticCorr,
    Gcov,
    /// Hyper-heuristic over kanalytic and gcov.
    Hh,
}

#[derive(Debug, Clone, Args)]
pub struct SearchArgs {
    #[arg(long, default_value_t = 200)]
    pub beta: usize,
    /// Probe width of the hyper-heuristic; defaults to min(60, beta).
    #[arg(long = "beta-h")]
    pub beta_h: Option<usize>,
    /// Merge children that reach the same cursor vector.
    #[arg(long)]
    pub dominance_filter: bool,
    /// JSON file overriding the heuristic constants (a, b, c, gamma_slope, gamma_intercept).
    #[arg(long)]
    pub constants: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum, default_value_t = HeuristicArg::Kanalytic)]
    pub heuristic: HeuristicArg,
    /// Dataset family; decides which analytic k rule applies.
    #[arg(long, value_enum)]
    pub family: Option<FamilyArg>,
    #[command(flatten)]
    pub search: SearchArgs,
    /// Print the report as JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Comma-separated heuristic names.
    #[arg(long, value_enum, value_delimiter = ',', required = true)]
    pub heuristics: Vec<HeuristicArg>,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub search: SearchArgs,
    /// Worker threads for running cells; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProbeMethod {
    Table,
    Closed,
    Closed2,
    Beta,
}

#[derive(Debug, Clone, Args)]
pub struct ProbeArgs {
    #[arg(long)]
    pub sigma: usize,
    /// String length n.
    #[arg(long = "n")]
    pub n: usize,
    /// Inclusive range `A:B`.
    #[arg(long = "k-range", value_parser = parse_range)]
    pub k_range: (usize, usize),
    #[arg(long, value_enum, default_value_t = ProbeMethod::Closed)]
    pub method: ProbeMethod,
    /// Emit q(k, n) instead of p(k, n).
    #[arg(long)]
    pub q: bool,
    /// Emit natural logarithms.
    #[arg(long)]
    pub log: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct KsweepArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Inclusive range `A:B`.
    #[arg(long = "k-range", value_parser = parse_range)]
    pub k_range: (usize, usize),
    #[arg(long, default_value_t = 200)]
    pub beta: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct TimingArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long, value_enum, value_delimiter = ',', required = true)]
    pub heuristics: Vec<HeuristicArg>,
    #[arg(long, default_value_t = 3)]
    pub repeats: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub search: SearchArgs,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub input: InputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CrossvalArgs {
    #[arg(long)]
    pub sigma: usize,
    #[arg(long = "n-max")]
    pub n_max: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

/// Parses `A:B` (inclusive, `A ≤ B`).
pub fn parse_range(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected A:B, got {s:?}"))?;
    let a: usize = a.trim().parse().map_err(|e| format!("bad range start {a:?}: {e}"))?;
    let b: usize = b.trim().parse().map_err(|e| format!("bad range end {b:?}: {e}"))?;
    if a > b {
        return Err(format!("empty range {a}:{b}"));
    }
    Ok((a, b))
}
