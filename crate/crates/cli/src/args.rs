use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "rebvoter",
    version,
    about = "Simulate and analyse rebellious voter models on a ring"
)]
pub struct Cli {
    /// Worker threads for replica fan-out (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Slow-α sweep: ρ, χ_k and μ per time bin.
    Sweep(SweepArgs),
    /// Harmonic functions f_x from a run of the dual particle system.
    Harmonic(HarmonicArgs),
    /// Left and right edge speeds from the frame process.
    Edge(EdgeArgs),
    /// Exact stationary laws and duality checks on small rings.
    Exact(ExactArgs),
    /// Fits and scans on a curve stored in a CSV file.
    Fit(FitArgs),
    /// Space-time picture of one trajectory as a binary PGM.
    Bitmap(BitmapArgs),
    /// Repeats the run recorded in a manifest.
    Rerun(RerunArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    #[value(name = "one-sided")]
    OneSided,
    #[value(name = "two-sided")]
    TwoSided,
    Disagreement,
    Swapping,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RepArg {
    Spin,
    Interface,
    Mirror,
}

#[derive(Debug, Clone, Args)]
pub struct PlanArgs {
    /// Ring size.
    #[arg(long = "N")]
    pub sites: usize,
    /// Total simulated time.
    #[arg(long = "T")]
    pub total_time: f64,
    /// Number of time bins.
    #[arg(long = "n", default_value_t = 1)]
    pub bins: usize,
    /// Fixed α; shorthand for equal sweep endpoints.
    #[arg(long, conflicts_with_all = ["ab", "ae"])]
    pub alpha: Option<f64>,
    /// α at the start of the sweep.
    #[arg(long, requires = "ae")]
    pub ab: Option<f64>,
    /// α at the end of the sweep.
    #[arg(long, requires = "ab")]
    pub ae: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Independent replicas averaged per bin.
    #[arg(long, default_value_t = 1)]
    pub replicas: usize,
    /// Discarded initial time (default: 1% of T).
    #[arg(long)]
    pub burn_in: Option<f64>,
    /// Largest tracked particle count (odd).
    #[arg(long, default_value_t = rebvoter::engine::DEFAULT_MAX_K)]
    pub max_k: usize,
    /// Initial state: `single`, `product-half` or a particle count.
    #[arg(long, default_value = "single")]
    pub initial: String,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub model: ModelArg,
    #[arg(long, value_enum, default_value = "interface")]
    pub rep: RepArg,
    #[command(flatten)]
    pub plan: PlanArgs,
    /// Output CSV path.
    #[arg(long)]
    pub out: PathBuf,
    /// Manifest path (default: `<out>.manifest`).
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct HarmonicArgs {
    #[arg(long, value_enum)]
    pub model: ModelArg,
    #[command(flatten)]
    pub plan: PlanArgs,
    /// Comma-separated patterns such as `1,11,101`.
    #[arg(long)]
    pub patterns: String,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SideArg {
    Left,
    Right,
    Both,
}

#[derive(Debug, Clone, Args)]
pub struct EdgeArgs {
    #[arg(long, value_enum)]
    pub model: ModelArg,
    /// Window width of the frame process.
    #[arg(long = "W", default_value_t = rebvoter::edge::DEFAULT_WINDOW)]
    pub width: usize,
    #[arg(long = "T")]
    pub total_time: f64,
    #[arg(long = "n", default_value_t = 1)]
    pub bins: usize,
    #[arg(long, conflicts_with_all = ["ab", "ae"])]
    pub alpha: Option<f64>,
    #[arg(long, requires = "ae")]
    pub ab: Option<f64>,
    #[arg(long, requires = "ab")]
    pub ae: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub replicas: usize,
    #[arg(long)]
    pub burn_in: Option<f64>,
    #[arg(long, value_enum, default_value = "both")]
    pub side: SideArg,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SectorArg {
    Odd,
    Even,
    Full,
}

#[derive(Debug, Clone, Args)]
pub struct ExactArgs {
    /// Model family; with --check-duality the default is all four pairings.
    #[arg(long, value_enum)]
    pub model: Option<ModelArg>,
    #[arg(long, value_enum, default_value = "interface")]
    pub rep: RepArg,
    #[arg(long = "N")]
    pub sites: usize,
    /// Competition parameter; with a check flag the default is the grid 0, 0.25, 0.5, 0.75, 1.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, value_enum, default_value = "odd")]
    pub sector: SectorArg,
    /// Verify the duality identity of the spin model against its dual.
    #[arg(long, conflicts_with = "check_pushforward")]
    pub check_duality: bool,
    /// Verify that the spin generator pushes forward to the interface generator.
    #[arg(long)]
    pub check_pushforward: bool,
    /// Patterns whose exact f_x is reported.
    #[arg(long)]
    pub patterns: Option<String>,
    /// Optional CSV of the stationary particle-count law.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FitModel {
    Linfrac,
    Scan,
    Beta,
    Savgol,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScanSideArg {
    Below,
    Above,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub model: FitModel,
    #[arg(long, default_value = "alpha_mean")]
    pub alpha_col: String,
    #[arg(long, default_value = "rho_hat")]
    pub value_col: String,
    /// Keep rows with α at least this value.
    #[arg(long)]
    pub from: Option<f64>,
    /// Keep rows with α at most this value.
    #[arg(long)]
    pub to: Option<f64>,
    #[arg(long, value_enum, default_value = "below")]
    pub side: ScanSideArg,
    #[arg(long)]
    pub grid_from: Option<f64>,
    #[arg(long)]
    pub grid_to: Option<f64>,
    #[arg(long, default_value_t = 0.001)]
    pub grid_step: f64,
    #[arg(long)]
    pub alpha_c: Option<f64>,
    /// Comma-separated exponents for the β scan.
    #[arg(long, default_value = "0.92,1")]
    pub betas: String,
    #[arg(long, default_value_t = 11)]
    pub window: usize,
    #[arg(long, default_value_t = 2)]
    pub degree: usize,
    /// Optional CSV with the full scan, curves or derivative series.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BitmapArgs {
    #[arg(long, value_enum)]
    pub model: ModelArg,
    #[arg(long, value_enum, default_value = "interface")]
    pub rep: RepArg,
    /// Window width in sites.
    #[arg(long = "W")]
    pub width: usize,
    /// Ring size (default: the window width).
    #[arg(long = "N")]
    pub sites: Option<usize>,
    /// Duration of the picture.
    #[arg(long = "T")]
    pub duration: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sample_dt: f64,
    #[arg(long, conflicts_with_all = ["ab", "ae"])]
    pub alpha: Option<f64>,
    #[arg(long, requires = "ae")]
    pub ab: Option<f64>,
    #[arg(long, requires = "ab")]
    pub ae: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value = "single")]
    pub initial: String,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct RerunArgs {
    #[arg(long)]
    pub manifest: PathBuf,
}
