use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use remetrica::DEFAULT_BUDGET;

#[derive(Debug, Parser)]
#[command(
    name = "remetrica",
    version,
    about = "Certified remetrization of iterated function systems"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bracket the remetrized distance for one or more pairs.
    Remetric(RemetricArgs),
    /// Check the (1+ε)-Lipschitz bound of every map on sampled pairs.
    Verify(VerifyArgs),
    /// Sampled Lipschitz constant of one map or of all compositions of length n.
    Lipschitz(LipschitzArgs),
    /// Per-level estimates of the joint spectral radius.
    Jsr(JsrArgs),
    /// Iterate the Hutchinson operator from a seed set.
    Attractor(AttractorArgs),
    /// Probe the equicontinuity modulus at a point or over a grid.
    Modulus(ModulusArgs),
    /// Load and validate a document, optionally printing its canonical form.
    Validate(ValidateArgs),
}

/// IFS document path, `-` for stdin.
#[derive(Debug, Args)]
pub struct DocArg {
    pub doc: PathBuf,
}

#[derive(Debug, Args)]
pub struct DepthArgs {
    #[arg(long)]
    pub epsilon: f64,
    /// Truncation depth N.
    #[arg(long, conflicts_with = "tail_tol")]
    pub depth: Option<usize>,
    /// Pick the smallest N whose tail bound is within this tolerance [default: 1e-6].
    #[arg(long)]
    pub tail_tol: Option<f64>,
    /// Maximum image pairs kept per level.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    pub budget: usize,
    /// Cap on the projected pair count when choosing N from --tail-tol [default: 8 × budget].
    #[arg(long)]
    pub work_cap: Option<usize>,
}

#[derive(Debug, Args)]
pub struct RemetricArgs {
    #[command(flatten)]
    pub doc: DocArg,
    #[command(flatten)]
    pub depth: DepthArgs,
    /// JSON file holding `[[x, y], ...]`; points are arrays or plain numbers.
    #[arg(long, conflicts_with_all = ["x", "y"])]
    pub pairs: Option<PathBuf>,
    /// Comma-separated coordinates.
    #[arg(long, requires = "y", allow_hyphen_values = true)]
    pub x: Option<String>,
    #[arg(long, requires = "x", allow_hyphen_values = true)]
    pub y: Option<String>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    /// Total number of sampled pairs, near-diagonal ladder included.
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub doc: DocArg,
    #[command(flatten)]
    pub depth: DepthArgs,
    #[command(flatten)]
    pub sample: SampleArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricChoice {
    Base,
    Remetric,
}

#[derive(Debug, Args)]
pub struct MetricArgs {
    #[arg(long, value_enum, default_value_t = MetricChoice::Base)]
    pub metric: MetricChoice,
    /// ε for `--metric remetric`.
    #[arg(long, default_value_t = 1.0)]
    pub epsilon: f64,
    /// Truncation depth for `--metric remetric`.
    #[arg(long, default_value_t = 12)]
    pub depth: usize,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    pub budget: usize,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("target").required(true).args(["map_index", "family_depth"]))]
pub struct LipschitzArgs {
    #[command(flatten)]
    pub doc: DocArg,
    #[arg(long)]
    pub map_index: Option<usize>,
    #[arg(long)]
    pub family_depth: Option<usize>,
    #[command(flatten)]
    pub metric: MetricArgs,
    #[command(flatten)]
    pub sample: SampleArgs,
}

#[derive(Debug, Args)]
pub struct JsrArgs {
    #[command(flatten)]
    pub doc: DocArg,
    #[arg(long, default_value_t = 6)]
    pub nmax: usize,
    #[command(flatten)]
    pub metric: MetricArgs,
    #[command(flatten)]
    pub sample: SampleArgs,
}

#[derive(Debug, Args)]
pub struct AttractorArgs {
    #[command(flatten)]
    pub doc: DocArg,
    #[arg(long, default_value_t = 10)]
    pub steps: usize,
    /// Grid spacing for deduplication; 0 keeps exact coordinates.
    #[arg(long, default_value_t = remetrica::hutchinson::DEFAULT_SNAP)]
    pub snap: f64,
    /// CSV file, one point per row [default: the corners of the domain].
    #[arg(long)]
    pub seed_set: Option<PathBuf>,
    /// Output file for the final set; the extension (.csv or .svg) picks the format. Repeatable.
    #[arg(long)]
    pub out: Vec<PathBuf>,
    #[arg(long, default_value_t = remetrica::hutchinson::DEFAULT_SIZE_CAP)]
    pub size_cap: usize,
    /// Also log Hausdorff distances under the truncated remetrization with this ε.
    #[arg(long)]
    pub remetric_epsilon: Option<f64>,
    #[arg(long, default_value_t = 12, requires = "remetric_epsilon")]
    pub remetric_depth: usize,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("where").required(true).args(["point", "grid"]))]
pub struct ModulusArgs {
    #[command(flatten)]
    pub doc: DocArg,
    /// Comma-separated coordinates of the probed point.
    #[arg(long, allow_hyphen_values = true)]
    pub point: Option<String>,
    /// Probe every node of a grid with this many points per axis.
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub eps_out: f64,
    /// Comma-separated, strictly decreasing candidate radii.
    #[arg(long)]
    pub radii: String,
    /// Composition length of the maps checked.
    #[arg(long, default_value_t = 1)]
    pub level: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Random points per radius, on top of the axis probes.
    #[arg(long, default_value_t = 64)]
    pub random_samples: usize,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub doc: DocArg,
    /// Points per axis of the validation grid [default: size-dependent].
    #[arg(long)]
    pub grid: Option<usize>,
    /// Print the canonical document instead of the report.
    #[arg(long)]
    pub canonical: bool,
}
